#include "geomimu/verify/oracles.hpp"

#include <cmath>
#include <limits>

namespace geomimu::oracles {

std::vector<std::vector<std::size_t>> top2_candidates(const BodyModel& body) {
  std::vector<int> owner;
  for (std::size_t s = 0; s < body.segment_to_joints.size(); ++s)
    for (auto j : body.segment_to_joints[s]) {
      if (owner.size() <= j) owner.resize(j + 1, -1);
      owner[j] = static_cast<int>(s);
    }
  std::vector<std::vector<std::size_t>> out(body.segment_count());
  for (std::size_t v = 0; v < body.vertex_count(); ++v) {
    std::vector<bool> member(body.segment_count(), false);
    for (const auto& e : body.skin_weights) {
      if (e.vertex != v || !(e.weight > 0.0f)) continue;
      int outranked_by = 0;
      for (const auto& f : body.skin_weights) {
        if (f.vertex != v || !(f.weight > 0.0f)) continue;
        if (f.weight > e.weight || (f.weight == e.weight && f.joint < e.joint)) ++outranked_by;
      }
      if (outranked_by < 2) member[static_cast<std::size_t>(owner[e.joint])] = true;
    }
    for (std::size_t s = 0; s < member.size(); ++s)
      if (member[s]) out[s].push_back(v);
  }
  return out;
}

std::size_t nearest_code(const Eigen::RowVectorXd& chunk, const Eigen::MatrixXd& codes) {
  std::vector<double> d(static_cast<std::size_t>(codes.rows()));
  for (Eigen::Index k = 0; k < codes.rows(); ++k) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < codes.cols(); ++c) acc += (chunk(c) - codes(k, c)) * (chunk(c) - codes(k, c));
    d[static_cast<std::size_t>(k)] = acc;
  }
  double lowest = std::numeric_limits<double>::infinity();
  for (double x : d) lowest = std::min(lowest, x);
  for (std::size_t k = 0; k < d.size(); ++k)
    if (d[k] == lowest) return k;
  return 0;
}

IndexMatrix exhaustive_quantize(const Latent& latent, const std::vector<Eigen::MatrixXd>& codes) {
  const auto P = static_cast<Eigen::Index>(codes.size());
  const Eigen::Index dim = codes.front().cols();
  IndexMatrix out(latent.rows(), P);
  for (Eigen::Index l = 0; l < latent.rows(); ++l)
    for (Eigen::Index j = 0; j < P; ++j)
      out(l, j) = static_cast<std::uint32_t>(
          nearest_code(latent.row(l).segment(j * dim, dim), codes[static_cast<std::size_t>(j)]));
  return out;
}

double inertia(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centroids) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    total += (centroids.rowwise() - data.row(i)).rowwise().squaredNorm().minCoeff();
  return total / static_cast<double>(data.rows());
}

Eigen::MatrixXd lloyd(const Eigen::MatrixXd& data, std::size_t K, std::size_t iterations, std::size_t restarts,
                      std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::uint64_t>(data.rows());
  const auto k_rows = static_cast<Eigen::Index>(K);
  Eigen::MatrixXd best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    Eigen::MatrixXd c(k_rows, data.cols());
    for (Eigen::Index k = 0; k < k_rows; ++k) c.row(k) = data.row(static_cast<Eigen::Index>(uniform_index(rng, n)));
    for (std::size_t it = 0; it < iterations; ++it) {
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k_rows, data.cols());
      Eigen::VectorXd counts = Eigen::VectorXd::Zero(k_rows);
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        Eigen::Index k;
        (c.rowwise() - data.row(i)).rowwise().squaredNorm().minCoeff(&k);
        sums.row(k) += data.row(i);
        counts(k) += 1.0;
      }
      for (Eigen::Index k = 0; k < k_rows; ++k)
        if (counts(k) > 0.0) c.row(k) = sums.row(k) / counts(k);
    }
    const double in = inertia(data, c);
    if (in < best_inertia) {
      best_inertia = in;
      best = c;
    }
  }
  return best;
}

namespace {

long double cosine(const Latent& a, const Latent& b) {
  long double total = 0.0L;
  for (Eigen::Index l = 0; l < a.rows(); ++l) {
    long double dot = 0.0L, na = 0.0L, nb = 0.0L;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      dot += static_cast<long double>(a(l, c)) * b(l, c);
      na += static_cast<long double>(a(l, c)) * a(l, c);
      nb += static_cast<long double>(b(l, c)) * b(l, c);
    }
    total += dot / std::sqrt(na * nb);
  }
  return total / a.rows();
}

long double dot(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
  long double s = 0.0L;
  for (Eigen::Index c = 0; c < a.cols(); ++c) s += static_cast<long double>(a(i, c)) * b(j, c);
  return s;
}

}  // namespace

long double infonce(std::span<const Latent> preds, std::span<const Latent> targets, double tau) {
  const std::size_t N = preds.size();
  long double total = 0.0L;
  for (std::size_t n = 0; n < N; ++n) {
    long double denom = 0.0L;
    for (std::size_t m = 0; m < N; ++m) denom += std::exp(cosine(preds[n], targets[m]) / tau);
    total += -std::log(std::exp(cosine(preds[n], targets[n]) / tau) / denom);
  }
  return total / N;
}

long double mcvpcl(std::span<const Latent> preds_ab, std::span<const Latent> targets_b,
                   std::span<const Latent> preds_ba, std::span<const Latent> targets_a, double tau) {
  return infonce(preds_ab, targets_b, tau) + infonce(preds_ba, targets_a, tau);
}

long double itc(const Eigen::MatrixXd& imu, const Eigen::MatrixXd& text, double tau) {
  const Eigen::Index N = imu.rows();
  long double total = 0.0L;
  for (Eigen::Index n = 0; n < N; ++n) {
    long double to_text = 0.0L, to_imu = 0.0L;
    for (Eigen::Index m = 0; m < N; ++m) {
      to_text += std::exp(dot(imu, n, text, m) / tau);
      to_imu += std::exp(dot(imu, m, text, n) / tau);
    }
    const long double pos = std::exp(dot(imu, n, text, n) / tau);
    total += -std::log(pos / to_text) - std::log(pos / to_imu);
  }
  return total / (2.0L * N);
}

long double label_contrastive(const Eigen::MatrixXd& h, const std::vector<std::string>& labels, double tau) {
  const Eigen::Index N = h.rows();
  long double total = 0.0L;
  int anchors = 0;
  for (Eigen::Index n = 0; n < N; ++n) {
    long double denom = 0.0L;
    for (Eigen::Index m = 0; m < N; ++m)
      if (m != n) denom += std::exp(dot(h, n, h, m) / tau);
    long double sum = 0.0L;
    int positives = 0;
    for (Eigen::Index p = 0; p < N; ++p) {
      if (p == n || labels[static_cast<std::size_t>(p)] != labels[static_cast<std::size_t>(n)]) continue;
      sum += -std::log(std::exp(dot(h, n, h, p) / tau) / denom);
      ++positives;
    }
    if (positives == 0) continue;
    total += sum / positives;
    ++anchors;
  }
  return anchors == 0 ? 0.0L : total / anchors;
}

long double commitment(const Latent& chunks, const Latent& codes, std::size_t P) {
  const Eigen::Index T = chunks.rows();
  const Eigen::Index width = chunks.cols();
  const Eigen::Index dim = width / static_cast<Eigen::Index>(P);
  long double total = 0.0L;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(P); ++j)
    for (Eigen::Index l = 0; l < T; ++l)
      for (Eigen::Index c = j * dim; c < (j + 1) * dim; ++c) {
        const long double e = static_cast<long double>(chunks(l, c)) - codes(l, c);
        total += e * e * P / (static_cast<long double>(T) * width);
      }
  return total;
}

long double smooth_l1(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const long double e = std::fabs(static_cast<long double>(x.data()[i]) - y.data()[i]);
    total += e < 1.0L ? e * e / 2.0L : e - 0.5L;
  }
  return total / x.size();
}

double chi_square_sf_even(double x, unsigned dof) {
  const double half = x / 2.0;
  double term = 1.0;
  double sum = 1.0;
  for (unsigned i = 1; i < dof / 2; ++i) {
    term *= half / i;
    sum += term;
  }
  return std::exp(-half) * sum;
}

}  // namespace geomimu::oracles
