#include "geomimu/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geomimu {

namespace {

void require_tau(double tau) {
  if (!(tau > 0.0)) throw ValidationError("temperature must be positive");
}

// Fixed-order dot product so that swapping operands is bit-exact.
double dot_rows(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
  return s;
}

}  // namespace

double seq_cosine_similarity(const Latent& pred, const Latent& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ValidationError("latent shapes differ");
  if (pred.rows() < 1 || pred.cols() < 1) throw ValidationError("latent sequence is empty");
  double sum = 0.0;
  for (Eigen::Index l = 0; l < pred.rows(); ++l) {
    const double np = pred.row(l).norm();
    const double nt = target.row(l).norm();
    if (np == 0.0 || nt == 0.0) throw ValidationError("zero-norm timestep in cosine similarity");
    sum += dot_rows(pred, l, target, l) / (np * nt);
  }
  return sum / static_cast<double>(pred.rows());
}

double softmax_nll(std::span<const double> logits, std::size_t target, std::optional<double> stabilizer) {
  if (logits.empty() || target >= logits.size()) throw ValidationError("softmax target out of range");
  const double shift = stabilizer ? *stabilizer : *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - shift);
  return std::log(sum) + (shift - logits[target]);
}

double infonce_cross_view(std::span<const Latent> preds, std::span<const Latent> targets, double tau) {
  require_tau(tau);
  const std::size_t N = preds.size();
  if (N == 0 || targets.size() != N) throw ValidationError("infonce needs N >= 1 matched pairs");
  std::vector<double> logits(N);
  double total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t m = 0; m < N; ++m) logits[m] = seq_cosine_similarity(preds[n], targets[m]) / tau;
    total += softmax_nll(logits, n);
  }
  return total / static_cast<double>(N);
}

double mcvpcl_loss(std::span<const Latent> preds_ab, std::span<const Latent> targets_b,
                   std::span<const Latent> preds_ba, std::span<const Latent> targets_a, double tau) {
  return infonce_cross_view(preds_ab, targets_b, tau) + infonce_cross_view(preds_ba, targets_a, tau);
}

double commitment_loss(const Latent& chunks, const Latent& codes, std::size_t codebooks) {
  if (chunks.rows() != codes.rows() || chunks.cols() != codes.cols())
    throw ValidationError("chunk and code shapes differ");
  const auto P = static_cast<Eigen::Index>(codebooks);
  if (P == 0 || chunks.cols() % P != 0) throw ValidationError("latent width not divisible by codebook count");
  if (chunks.rows() == 0) throw ValidationError("empty latent sequence");
  const Eigen::Index dim = chunks.cols() / P;
  const double scale = static_cast<double>(P) / (static_cast<double>(chunks.rows()) * static_cast<double>(chunks.cols()));
  double total = 0.0;
  for (Eigen::Index j = 0; j < P; ++j) {
    double sq = 0.0;
    for (Eigen::Index l = 0; l < chunks.rows(); ++l)
      sq += (chunks.row(l).segment(j * dim, dim) - codes.row(l).segment(j * dim, dim)).squaredNorm();
    total += scale * sq;
  }
  return total;
}

double smooth_l1(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw ValidationError("SmoothL1 shapes differ");
  if (x.size() == 0) throw ValidationError("SmoothL1 of empty matrices");
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double e = std::abs(x(i, j) - y(i, j));
      total += e < 1.0 ? 0.5 * e * e : e - 0.5;
    }
  return total / static_cast<double>(x.size());
}

EmbeddingBatch::EmbeddingBatch(Eigen::MatrixXd vectors, std::vector<std::string> labels)
    : vectors_(std::move(vectors)), labels_(std::move(labels)) {
  if (vectors_.rows() == 0 || vectors_.cols() == 0) throw ValidationError("embedding batch is empty");
  for (Eigen::Index i = 0; i < vectors_.rows(); ++i) {
    if (!vectors_.row(i).allFinite()) throw ValidationError("embedding has non-finite entries");
    if (std::abs(vectors_.row(i).norm() - 1.0) > 1e-6)
      throw ValidationError("embedding row " + std::to_string(i) + " is not unit norm");
  }
  if (!labels_.empty() && labels_.size() != static_cast<std::size_t>(vectors_.rows()))
    throw ValidationError("label count differs from batch size");
}

double itc_loss(const EmbeddingBatch& imu, const EmbeddingBatch& text, double tau) {
  require_tau(tau);
  const std::size_t N = imu.size();
  if (text.size() != N) throw ValidationError("IMU and text batches differ in size");
  if (imu.vectors().cols() != text.vectors().cols()) throw ValidationError("embedding widths differ");
  const auto n_idx = static_cast<Eigen::Index>(N);
  Eigen::MatrixXd sim(n_idx, n_idx);
  for (Eigen::Index n = 0; n < n_idx; ++n)
    for (Eigen::Index m = 0; m < n_idx; ++m) sim(n, m) = dot_rows(imu.vectors(), n, text.vectors(), m) / tau;

  std::vector<double> row(N), col(N);
  double total = 0.0;
  for (Eigen::Index n = 0; n < n_idx; ++n) {
    for (Eigen::Index m = 0; m < n_idx; ++m) {
      row[static_cast<std::size_t>(m)] = sim(n, m);
      col[static_cast<std::size_t>(m)] = sim(m, n);
    }
    total += softmax_nll(row, static_cast<std::size_t>(n)) + softmax_nll(col, static_cast<std::size_t>(n));
  }
  return total / (2.0 * static_cast<double>(N));
}

double label_contrastive_loss(const EmbeddingBatch& batch, double tau) {
  require_tau(tau);
  if (!batch.has_labels()) throw ValidationError("label contrastive loss needs labels");
  const std::size_t N = batch.size();
  const auto& h = batch.vectors();
  const auto& labels = batch.labels();

  double total = 0.0;
  std::size_t anchors = 0;
  std::vector<double> logits;
  for (std::size_t n = 0; n < N; ++n) {
    logits.clear();
    std::vector<std::size_t> positive_slots;
    for (std::size_t m = 0; m < N; ++m) {
      if (m == n) continue;
      if (labels[m] == labels[n]) positive_slots.push_back(logits.size());
      logits.push_back(dot_rows(h, static_cast<Eigen::Index>(n), h, static_cast<Eigen::Index>(m)) / tau);
    }
    if (positive_slots.empty()) continue;
    const double shift = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - shift);
    const double log_denom = std::log(denom) + shift;
    double anchor = 0.0;
    for (auto p : positive_slots) anchor += log_denom - logits[p];
    total += anchor / static_cast<double>(positive_slots.size());
    ++anchors;
  }
  return anchors == 0 ? 0.0 : total / static_cast<double>(anchors);
}

}  // namespace geomimu
