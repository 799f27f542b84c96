#include "geomimu/verify/suites.hpp"

#include "geomimu/gcb1.hpp"
#include "geomimu/gmc1.hpp"
#include "geomimu/gmx1.hpp"
#include "geomimu/objectives.hpp"
#include "geomimu/placement.hpp"
#include "geomimu/setup_sampler.hpp"
#include "geomimu/verify/fixtures.hpp"
#include "geomimu/verify/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>

namespace geomimu::verify {

namespace {

Check within(std::string name, double measured, double tolerance, std::string detail = "") {
  return {std::move(name), std::isfinite(measured) && measured <= tolerance, measured, tolerance,
          std::move(detail)};
}

Check holds(std::string name, bool ok, std::string detail = "") {
  return {std::move(name), ok, ok ? 0.0 : 1.0, 0.0, std::move(detail)};
}

template <typename F>
Check guarded(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return holds(name, false, std::string("threw: ") + e.what());
  }
}

PlacementCandidate point_sensor() {
  PlacementCandidate c;
  c.segment = 0;
  return c;
}

MotionSequence single_segment(std::size_t frames, double rate, const std::function<Vec3(double)>& pos,
                              const std::function<Mat3(double)>& rot) {
  MotionSequence m;
  m.rate = rate;
  m.frames = frames;
  m.segments = 1;
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / rate;
    m.positions.push_back(pos(t));
    m.orientations.push_back(canonicalize(Quat(rot(t))));
  }
  return m;
}

Mat3 rz(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

Latent gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Latent z(rows, cols);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = scale * standard_normal(rng);
  return z;
}

Eigen::MatrixXd unit_rows(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m = gaussian(rng, rows, cols);
  m.rowwise().normalize();
  return m;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

}  // namespace

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<Check> kinematics_checks() {
  std::vector<Check> out;
  const BodyModel body = fixtures::tube_chain_body();
  const Vec3 g = default_gravity();

  out.push_back(guarded("stationary |accel| = g, gyro = 0", [&] {
    const MotionSequence still = fixtures::stationary_motion(3, 30, 60.0, 101);
    const auto cands = enumerate_placements(body, still);
    Rng rng(102);
    std::vector<Mat3> mounts = {Mat3::Identity()};
    for (int i = 0; i < 3; ++i) mounts.push_back(fixtures::random_rotation(rng));
    double accel_err = 0.0, gyro_err = 0.0;
    for (const auto& c : cands)
      for (const auto& m : mounts) {
        const Signal s = simulate_signal(still, c, m, g);
        for (Eigen::Index t = 0; t < s.rows(); ++t) {
          accel_err = std::max(accel_err, std::abs(s.row(t).head<3>().norm() - kStandardGravity));
          gyro_err = std::max(gyro_err, s.row(t).tail<3>().norm());
        }
      }
    Check c = within("stationary |accel| = g, gyro = 0", std::max(accel_err, gyro_err), 1e-6,
                     std::to_string(cands.size()) + " placements x 4 mounts; gyro max " + fmt("%.3g", gyro_err));
    return c;
  }));

  out.push_back(guarded("free fall accel = 0", [&] {
    const MotionSequence fall = fixtures::free_fall_motion(3, 60, 60.0, g, 103);
    const auto cands = enumerate_placements(body, fall);
    Rng rng(104);
    double err = 0.0;
    for (const auto& c : cands) {
      const Signal s = simulate_signal(fall, c, fixtures::random_rotation(rng), g);
      err = std::max(err, s.leftCols<3>().cwiseAbs().maxCoeff());
    }
    return within("free fall accel = 0", err, 1e-6, std::to_string(cands.size()) + " placements");
  }));

  out.push_back(guarded("circular motion centripetal = 4 m/s^2", [&] {
    const double w = 2.0;
    const MotionSequence circle = single_segment(
        240, 60.0, [&](double t) { return Vec3(std::cos(w * t), std::sin(w * t), 0.0); },
        [&](double t) { return rz(w * t); });
    const Signal s = simulate_signal(circle, point_sensor(), Mat3::Identity(), g);
    double rel = 0.0;
    for (Eigen::Index t = 0; t < s.rows(); ++t) rel = std::max(rel, std::abs(-s(t, 0) - 4.0) / 4.0);
    return within("circular motion centripetal = 4 m/s^2", rel, 0.005, "relative error, r = 1 m, w = 2 rad/s, 60 Hz");
  }));

  out.push_back(guarded("constant z-spin gyro = (0,0,w)", [&] {
    double err = 0.0;
    for (double w : {2.0, -3.0, 7.5}) {
      const MotionSequence spin = single_segment(
          120, 60.0, [](double) { return Vec3(0.3, -0.2, 1.0); }, [&](double t) { return rz(w * t); });
      const Signal s = simulate_signal(spin, point_sensor(), Mat3::Identity(), g);
      for (Eigen::Index t = 0; t < s.rows(); ++t)
        err = std::max(err, (s.row(t).tail<3>().transpose() - Vec3(0, 0, w)).cwiseAbs().maxCoeff());
    }
    return within("constant z-spin gyro = (0,0,w)", err, 1e-9);
  }));

  out.push_back(guarded("aliased rotation rejected", [&] {
    const MotionSequence fast = single_segment(
        10, 60.0, [](double) { return Vec3::Zero(); }, [](double t) { return rz(60.0 * 3.1415 * t); });
    try {
      simulate_signal(fast, point_sensor(), Mat3::Identity(), default_gravity());
    } catch (const ValidationError& e) {
      return holds("aliased rotation rejected", std::string(e.what()) == "angular sampling aliased");
    }
    return holds("aliased rotation rejected", false, "no error raised");
  }));
  return out;
}

std::vector<Check> equivariance_checks(std::size_t draws) {
  std::vector<Check> out;
  out.push_back(guarded("mount equivariance", [&] {
    const BodyModel body = fixtures::tube_chain_body();
    const MotionSequence motion = fixtures::fixture_motion(3, 2.0, 60.0);
    const auto cands = enumerate_placements(body, motion);
    Rng rng(201);
    double err = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      const auto& c = cands[(i * 13) % cands.size()];
      const Mat3 delta = fixtures::random_rotation(rng);
      const Signal base = simulate_window(motion, c, Mat3::Identity(), nullptr, default_gravity(), 0).samples;
      const Signal mounted = simulate_window(motion, c, delta, nullptr, default_gravity(), 0).samples;
      err = std::max(err, (mounted - rotate_imu_signal(base, delta.transpose())).cwiseAbs().maxCoeff());
    }
    return within("simulate(mount = D) == D^T simulate(mount = I)", err, 1e-9,
                  std::to_string(draws) + " random rotations, noise off");
  }));
  return out;
}

std::vector<Check> frame_checks(std::size_t samples) {
  std::vector<Check> out;
  out.push_back(guarded("surface frames", [&] {
    Rng rng(301);
    double ortho = 0.0, det = 0.0, tn = 0.0, bxt = 0.0, nn = 0.0;
    std::size_t degenerate = 0;
    const double eps[] = {1e-2, 1e-5, 1e-8, 1e-10, 1e-13, 0.0};
    for (std::size_t i = 0; i < samples; ++i) {
      const Vec3 n = fixtures::random_unit_vector(rng) * std::pow(10.0, uniform(rng, -3.0, 3.0));
      Vec3 u;
      switch (i % 4) {
        case 0:
        case 1: u = fixtures::random_unit_vector(rng); break;
        case 2: u = n.normalized() + eps[i / 4 % 6] * fixtures::random_unit_vector(rng); break;
        default: u = -n.normalized() * 2.0 + eps[i / 4 % 6] * fixtures::random_unit_vector(rng); break;
      }
      const SurfaceFrame f = surface_frame(n, u);
      const Mat3& R = f.rotation;
      degenerate += f.degenerate;
      ortho = std::max(ortho, (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff());
      det = std::max(det, std::abs(R.determinant() - 1.0));
      tn = std::max(tn, std::abs(R.col(0).dot(R.col(2))));
      bxt = std::max(bxt, (R.col(1) - R.col(2).cross(R.col(0))).cwiseAbs().maxCoeff());
      nn = std::max(nn, (R.col(2) - n.normalized()).cwiseAbs().maxCoeff());
    }
    const std::string d = std::to_string(samples) + " pairs, " + std::to_string(degenerate) + " degenerate";
    out.push_back(within("frame orthonormal", ortho, 1e-9, d));
    out.push_back(within("frame det = +1", det, 1e-9));
    out.push_back(within("frame t . n = 0", tn, 1e-12));
    out.push_back(within("frame b = n x t", bxt, 1e-12));
    return within("frame normal column = input normal", nn, 1e-12);
  }));

  out.push_back(guarded("fixture placement frames", [&] {
    const BodyModel body = fixtures::tube_chain_body();
    const auto cands = enumerate_placements(body, fixtures::fixture_motion(3, 1.0, 60.0));
    double err = 0.0;
    std::size_t degenerate = 0;
    for (const auto& c : cands) {
      err = std::max(err, (c.surface_frame.transpose() * c.surface_frame - Mat3::Identity()).cwiseAbs().maxCoeff());
      err = std::max(err, std::abs(c.surface_frame.determinant() - 1.0));
      degenerate += c.degenerate;
    }
    return within("fixture placement frames orthonormal", err, 1e-9,
                  std::to_string(cands.size()) + " candidates, " + std::to_string(degenerate) + " degenerate (caps)");
  }));
  return out;
}

std::vector<Check> placement_rule_checks(std::size_t matrices) {
  std::vector<Check> out;
  out.push_back(guarded("top-2 rule", [&] {
    Rng rng(401);
    std::size_t mismatches = 0;
    std::size_t ties = 0;
    for (std::size_t m = 0; m < matrices; ++m) {
      BodyModel body;
      const std::size_t S = 2 + uniform_index(rng, 7);
      const std::size_t J = S + uniform_index(rng, S + 1);
      body.segment_to_joints.resize(S);
      for (std::size_t s = 0; s < S; ++s) {
        body.segment_names.push_back("s" + std::to_string(s));
        body.parent_index.push_back(s == 0 ? -1 : static_cast<int>(uniform_index(rng, s)));
      }
      std::vector<std::uint32_t> joints(J);
      for (std::size_t j = 0; j < J; ++j) joints[j] = static_cast<std::uint32_t>(j);
      for (std::size_t j = J; j > 1; --j) std::swap(joints[j - 1], joints[uniform_index(rng, j)]);
      for (std::size_t j = 0; j < J; ++j)
        body.segment_to_joints[j < S ? j : uniform_index(rng, S)].push_back(joints[j]);
      const std::size_t V = 5 + uniform_index(rng, 56);
      body.rest_vertices.assign(V, Vec3::Zero());
      const bool tied = m % 3 == 0;
      for (std::size_t v = 0; v < V; ++v) {
        const std::size_t n = 1 + uniform_index(rng, std::min<std::size_t>(5, J));
        std::vector<std::uint32_t> pick(J);
        for (std::size_t j = 0; j < J; ++j) pick[j] = static_cast<std::uint32_t>(j);
        for (std::size_t j = 0; j < n; ++j) std::swap(pick[j], pick[j + uniform_index(rng, J - j)]);
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& x : w) {
          x = tied ? static_cast<double>(1 + uniform_index(rng, 3)) : uniform(rng, 0.01, 1.0);
          total += x;
        }
        for (std::size_t j = 0; j < n; ++j)
          body.skin_weights.push_back({static_cast<std::uint32_t>(v), pick[j], static_cast<float>(w[j] / total)});
        if (uniform01(rng) < 0.2) body.skin_weights.push_back({static_cast<std::uint32_t>(v), pick[n % J], 0.0f});
        ties += tied;
      }
      const auto got = select_candidate_vertices(body).per_segment;
      if (got != oracles::top2_candidates(body)) ++mismatches;
    }
    return within("top-2 skinning selection == brute-force oracle", static_cast<double>(mismatches), 0.0,
                  std::to_string(matrices) + " random sparse weight matrices");
  }));
  return out;
}

std::vector<Check> masking_checks(std::size_t draws) {
  std::vector<Check> out;
  out.push_back(guarded("visibility masks", [&] {
    Rng rng(501);
    const std::size_t S = 23;
    std::vector<double> counts(6, 0.0);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < draws; ++i) {
      const auto vis = sample_visibility_mask(S, rng);
      const bool ok = !vis.empty() && vis.size() <= 5 && std::is_sorted(vis.begin(), vis.end()) &&
                      std::adjacent_find(vis.begin(), vis.end()) == vis.end() && vis.back() < S;
      bad += !ok;
      if (vis.size() >= 1 && vis.size() <= 5) counts[vis.size()] += 1.0;
    }
    const double expected = static_cast<double>(draws) / 5.0;
    double chi2 = 0.0;
    for (std::size_t k = 1; k <= 5; ++k) chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
    const double p = oracles::chi_square_sf_even(chi2, 4);
    out.push_back(within("1 <= |visible| <= 5, distinct, sorted", static_cast<double>(bad), 0.0,
                         std::to_string(draws) + " draws"));
    Check c{"|visible| uniform over {1..5} (chi-square p > 0.01)", p > 0.01, p, 0.01,
            fmt("chi2 = %.4f, df = 4", chi2)};
    return c;
  }));

  out.push_back(guarded("masked segments zero-filled", [&] {
    Rng rng(502);
    GraphWindow w(8, 23);
    for (auto& x : w.signal) x = 1.0 + uniform01(rng);
    double leak = 0.0;
    bool flags = true;
    for (int i = 0; i < 200; ++i) {
      const auto vis = sample_visibility_mask(23, rng);
      const GraphWindow m = apply_mask(w, vis);
      for (std::size_t s = 0; s < 23; ++s) {
        const bool visible = std::binary_search(vis.begin(), vis.end(), s);
        flags = flags && m.visibility[s] == visible;
        for (std::size_t t = 0; t < 8; ++t)
          for (std::size_t c = 0; c < 6; ++c)
            leak = std::max(leak, visible ? std::abs(m.at(t, s, c) - w.at(t, s, c)) : std::abs(m.at(t, s, c)));
      }
    }
    Check c = within("masked segments zero-filled, visible untouched", leak, 0.0);
    if (!flags) c = holds(c.name, false, "visibility flags disagree with the mask");
    return c;
  }));
  return out;
}

std::vector<Check> loss_checks(std::size_t instances) {
  std::vector<Check> out;
  Rng rng(601);
  auto latents = [&](std::size_t N, Eigen::Index T, Eigen::Index d) {
    std::vector<Latent> v;
    for (std::size_t i = 0; i < N; ++i) v.push_back(gaussian(rng, T, d));
    return v;
  };

  out.push_back(guarded("mcvpcl oracle", [&] {
    double err = 0.0;
    bool n1_zero = true;
    for (std::size_t i = 0; i < instances; ++i) {
      const std::size_t N = 1 + uniform_index(rng, 16);
      const auto T = static_cast<Eigen::Index>(1 + uniform_index(rng, 8));
      const auto d = static_cast<Eigen::Index>(2 + uniform_index(rng, 15));
      const auto pab = latents(N, T, d), tb = latents(N, T, d), pba = latents(N, T, d), ta = latents(N, T, d);
      const double tau = i % 2 ? ObjectiveDefaults::encoder_tau : uniform(rng, 0.05, 1.0);
      const double got = mcvpcl_loss(pab, tb, pba, ta, tau);
      err = std::max(err, std::abs(got - static_cast<double>(oracles::mcvpcl(pab, tb, pba, ta, tau))));
      const auto one_a = latents(1, T, d), one_b = latents(1, T, d);
      n1_zero = n1_zero && mcvpcl_loss(one_a, one_b, one_b, one_a, tau) == 0.0;
    }
    out.push_back(holds("mcvpcl_loss N = 1 returns 0 exactly", n1_zero));
    return within("mcvpcl_loss == naive oracle", err, 1e-10, std::to_string(instances) + " instances, N <= 16");
  }));

  out.push_back(guarded("itc oracle", [&] {
    double err = 0.0;
    bool symmetric = true, n1_zero = true;
    for (std::size_t i = 0; i < instances; ++i) {
      const auto N = static_cast<Eigen::Index>(1 + uniform_index(rng, 16));
      const auto d = static_cast<Eigen::Index>(2 + uniform_index(rng, 31));
      const Eigen::MatrixXd a = unit_rows(rng, N, d), b = unit_rows(rng, N, d);
      const double tau = ObjectiveDefaults::motion_language_tau * (1.0 + static_cast<double>(i % 3));
      const EmbeddingBatch ea(a), eb(b);
      const double got = itc_loss(ea, eb, tau);
      err = std::max(err, std::abs(got - static_cast<double>(oracles::itc(a, b, tau))));
      symmetric = symmetric && got == itc_loss(eb, ea, tau);
      const EmbeddingBatch one_a(unit_rows(rng, 1, d)), one_b(unit_rows(rng, 1, d));
      n1_zero = n1_zero && itc_loss(one_a, one_b, tau) == 0.0;
    }
    out.push_back(holds("itc_loss symmetric bit-for-bit under batch swap", symmetric));
    out.push_back(holds("itc_loss N = 1 returns 0 exactly", n1_zero));
    return within("itc_loss == naive oracle", err, 1e-10, std::to_string(instances) + " instances, N <= 16");
  }));

  out.push_back(guarded("commitment oracle", [&] {
    double err = 0.0;
    bool zero = true;
    for (std::size_t i = 0; i < instances; ++i) {
      const std::size_t P = 1 + uniform_index(rng, 4);
      const auto dim = static_cast<Eigen::Index>(1 + uniform_index(rng, 8));
      const auto T = static_cast<Eigen::Index>(1 + uniform_index(rng, 16));
      const Latent z = gaussian(rng, T, dim * static_cast<Eigen::Index>(P));
      const Latent e = gaussian(rng, T, dim * static_cast<Eigen::Index>(P));
      err = std::max(err, std::abs(commitment_loss(z, e, P) - static_cast<double>(oracles::commitment(z, e, P))));
      zero = zero && commitment_loss(z, z, P) == 0.0;
    }
    out.push_back(holds("commitment_loss(z, z) = 0 exactly", zero));
    return within("commitment_loss == naive oracle", err, 1e-10, std::to_string(instances) + " instances");
  }));

  out.push_back(guarded("smooth_l1 oracle", [&] {
    double err = 0.0;
    for (std::size_t i = 0; i < instances; ++i) {
      const auto r = static_cast<Eigen::Index>(1 + uniform_index(rng, 16));
      const auto c = static_cast<Eigen::Index>(1 + uniform_index(rng, 16));
      const Eigen::MatrixXd x = gaussian(rng, r, c, 1.5), y = gaussian(rng, r, c, 1.5);
      err = std::max(err, std::abs(smooth_l1(x, y) - static_cast<double>(oracles::smooth_l1(x, y))));
    }
    return within("smooth_l1 == naive oracle", err, 1e-10, std::to_string(instances) + " instances");
  }));

  out.push_back(guarded("label contrastive oracle", [&] {
    double err = 0.0;
    bool n1_zero = true;
    for (std::size_t i = 0; i < instances; ++i) {
      const auto N = static_cast<Eigen::Index>(1 + uniform_index(rng, 16));
      const auto d = static_cast<Eigen::Index>(2 + uniform_index(rng, 15));
      const Eigen::MatrixXd h = unit_rows(rng, N, d);
      const std::size_t alphabet = 1 + uniform_index(rng, 5);
      std::vector<std::string> labels;
      for (Eigen::Index n = 0; n < N; ++n) labels.push_back("act" + std::to_string(uniform_index(rng, alphabet)));
      const double tau = uniform(rng, 0.05, 0.5);
      const double got = label_contrastive_loss(EmbeddingBatch(h, labels), tau);
      err = std::max(err, std::abs(got - static_cast<double>(oracles::label_contrastive(h, labels, tau))));
      n1_zero = n1_zero && label_contrastive_loss(EmbeddingBatch(unit_rows(rng, 1, d), {"x"}), tau) == 0.0;
    }
    out.push_back(holds("label_contrastive_loss N = 1 returns 0 exactly", n1_zero));
    return within("label_contrastive_loss == naive oracle", err, 1e-10, std::to_string(instances) + " instances");
  }));
  return out;
}

namespace {

// Three well-separated isotropic clusters in 2-D.
std::vector<Latent> three_cluster_latents(std::size_t per_cluster, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  const Vec3 centers[3] = {Vec3(0.0, 0.0, 0), Vec3(5.0, 5.0, 0), Vec3(-5.0, 5.0, 0)};
  std::vector<Latent> out;
  const std::size_t rows = 100;
  Latent cur(static_cast<Eigen::Index>(rows), 2);
  std::size_t filled = 0;
  for (std::size_t i = 0; i < 3 * per_cluster; ++i) {
    const Vec3& c = centers[i % 3];
    cur(static_cast<Eigen::Index>(filled), 0) = c.x() + sigma * standard_normal(rng);
    cur(static_cast<Eigen::Index>(filled), 1) = c.y() + sigma * standard_normal(rng);
    if (++filled == rows) {
      out.push_back(cur);
      filled = 0;
    }
  }
  if (filled > 0) out.push_back(cur.topRows(static_cast<Eigen::Index>(filled)));
  return out;
}

Eigen::MatrixXd stack(const std::vector<Latent>& ls) {
  Eigen::Index rows = 0;
  for (const auto& l : ls) rows += l.rows();
  Eigen::MatrixXd out(rows, ls.front().cols());
  Eigen::Index at = 0;
  for (const auto& l : ls) {
    out.middleRows(at, l.rows()) = l;
    at += l.rows();
  }
  return out;
}

// Max distance between matched centroids, greedy over the closest pairs.
double centroid_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  std::vector<bool> used(static_cast<std::size_t>(b.rows()), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index pick = 0;
    for (Eigen::Index k = 0; k < b.rows(); ++k) {
      if (used[static_cast<std::size_t>(k)]) continue;
      const double d = (a.row(i) - b.row(k)).norm();
      if (d < best) {
        best = d;
        pick = k;
      }
    }
    used[static_cast<std::size_t>(pick)] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

std::vector<Check> pq_checks() {
  std::vector<Check> out;
  Rng rng(701);

  out.push_back(guarded("quantize oracle", [&] {
    std::size_t mismatches = 0, serial_diff = 0, cases = 0, tie_cases = 0, idempotent_fail = 0;
    for (int i = 0; i < 400; ++i) {
      const std::size_t P = 1 + uniform_index(rng, 3);
      const std::size_t K = 1 + uniform_index(rng, 64);
      const std::size_t dim = 1 + uniform_index(rng, 8);
      const auto T = static_cast<Eigen::Index>(1 + uniform_index(rng, 16));
      Codebooks books(P, K, dim);
      for (auto& c : books.codes) c = gaussian(rng, static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(dim));
      Latent z = gaussian(rng, T, static_cast<Eigen::Index>(P * dim));
      if (i % 2 == 1 && K > 1) {
        ++tie_cases;
        for (std::size_t j = 0; j < P; ++j) {
          const auto src = static_cast<Eigen::Index>(uniform_index(rng, K - 1));
          const auto dup = src + 1 + static_cast<Eigen::Index>(uniform_index(rng, K - 1 - static_cast<std::size_t>(src)));
          books.codes[j].row(dup) = books.codes[j].row(src);
          for (Eigen::Index l = 0; l < T; l += 2)
            z.row(l).segment(static_cast<Eigen::Index>(j * dim), static_cast<Eigen::Index>(dim)) =
                books.codes[j].row(uniform01(rng) < 0.5 ? src : dup);
        }
      }
      const QuantizeResult q = quantize(z, books);
      mismatches += q.indices != oracles::exhaustive_quantize(z, books.codes);
      const QuantizeResult s = quantize_serial(z, books);
      serial_diff += (s.indices != q.indices) || (s.quantized != q.quantized);
      idempotent_fail += quantize(q.quantized, books).indices != q.indices;
      ++cases;
    }
    out.push_back(within("parallel quantize == serial reference (bits)", static_cast<double>(serial_diff), 0.0));
    out.push_back(within("quantize idempotent", static_cast<double>(idempotent_fail), 0.0));
    return within("quantize == exhaustive nearest-neighbor oracle", static_cast<double>(mismatches), 0.0,
                  std::to_string(cases) + " cases (K <= 64), " + std::to_string(tie_cases) + " with duplicated codes");
  }));

  out.push_back(guarded("fit 3-gaussian", [&] {
    const auto latents = three_cluster_latents(600, 0.3, 702);
    FitConfig cfg;
    cfg.P = 1;
    cfg.K = 3;
    cfg.dim = 2;
    cfg.epochs = 15;
    cfg.batch_rows = 128;
    cfg.seed = 703;
    const FitResult fit = fit_codebooks(latents, cfg);
    const Eigen::MatrixXd data = stack(latents);
    const Eigen::MatrixXd lloyd = oracles::lloyd(data, 3, 50, 10, 704);
    const double gap = centroid_gap(fit.books.codes[0], lloyd);
    double worst_rise = 0.0;
    for (std::size_t e = 1; e < fit.log.size(); ++e)
      worst_rise = std::max(worst_rise, fit.log[e].commitment - fit.log[e - 1].commitment);
    const double ratio = fit.log.back().commitment / (oracles::inertia(data, lloyd) / 2.0);
    out.push_back(within("commitment non-increasing over epochs", worst_rise, 1e-6, "largest per-epoch rise"));
    out.push_back(within("fit commitment <= 1.1 x Lloyd", ratio, 1.1, "ratio to Lloyd oracle"));
    const FitResult again = fit_codebooks(latents, cfg);
    out.push_back(holds("fit_codebooks deterministic under a fixed seed", again.books.codes[0] == fit.books.codes[0]));
    return within("fit_codebooks K=3 centroids vs Lloyd oracle", gap, 0.05, "max matched centroid distance");
  }));

  out.push_back(guarded("perfectly quantizable", [&] {
    const std::size_t K = 8, P = 2, dim = 3;
    std::vector<Eigen::MatrixXd> truth;
    for (std::size_t j = 0; j < P; ++j) truth.push_back(gaussian(rng, K, dim, 3.0));
    Latent z(400, static_cast<Eigen::Index>(P * dim));
    for (Eigen::Index l = 0; l < z.rows(); ++l)
      for (std::size_t j = 0; j < P; ++j)
        z.row(l).segment(static_cast<Eigen::Index>(j * dim), dim) =
            truth[j].row(static_cast<Eigen::Index>((static_cast<std::size_t>(l) * (j + 1)) % K));
    FitConfig cfg;
    cfg.P = P;
    cfg.K = K;
    cfg.dim = dim;
    cfg.epochs = 5;
    cfg.batch_rows = 64;
    cfg.seed = 705;
    const std::vector<Latent> data{z};
    const FitResult fit = fit_codebooks(data, cfg);
    return within("K distinct repeated chunks -> commitment < 1e-6", fit.log.back().commitment, 1e-6);
  }));

  out.push_back(guarded("uniform perplexity", [&] {
    bool exact = true;
    for (std::size_t K : {1, 2, 3, 7, 100, 2048}) {
      const std::vector<std::uint64_t> hist(K, 37);
      const auto h = codebook_health(hist);
      exact = exact && h.perplexity == static_cast<double>(K) && h.top1_mass == 1.0 / static_cast<double>(K);
    }
    bool bounded = true;
    for (int i = 0; i < 100; ++i) {
      const std::size_t K = 2 + uniform_index(rng, 60);
      std::vector<std::uint64_t> hist(K);
      for (auto& c : hist) c = uniform_index(rng, 5);
      hist[0] += 1;
      hist[1] = hist[0] + 1;
      const auto h = codebook_health(hist);
      bounded = bounded && h.perplexity >= 1.0 && h.perplexity < static_cast<double>(K);
    }
    out.push_back(holds("perplexity in [1, K), below K when non-uniform", bounded, "100 random histograms"));
    return holds("perplexity = K and top-1 mass = 1/K on uniform histograms", exact);
  }));

  out.push_back(guarded("interleave", [&] {
    bool ok = true;
    for (Eigen::Index T = 0; T <= 12; ++T)
      for (Eigen::Index P = 1; P <= 4; ++P) {
        IndexMatrix idx(T, P);
        for (Eigen::Index i = 0; i < idx.size(); ++i) idx.data()[i] = static_cast<std::uint32_t>(uniform_index(rng, 4096));
        const auto flat = interleave_tokens(idx);
        ok = ok && flat.size() == static_cast<std::size_t>(T * P) && deinterleave(flat, static_cast<std::size_t>(P)) == idx;
        for (Eigen::Index l = 0; l < T; ++l)
          for (Eigen::Index j = 0; j < P; ++j) ok = ok && flat[static_cast<std::size_t>(l * P + j)] == idx(l, j);
      }
    return holds("interleave / deinterleave inverse on all shapes", ok, "T' <= 12, P <= 4");
  }));

  out.push_back(guarded("150 tokens", [&] {
    GraphWindow w(300, 23);
    for (auto& x : w.signal) x = standard_normal(rng);
    const Latent z = reference_featurize(w, 128);
    const Codebooks books = fixtures::fixture_codebooks(706, 2, 16, 64);
    const auto tokens = interleave_tokens(quantize(z, books).indices);
    return holds("300-frame window -> T' = 75 -> 150 tokens", z.rows() == 75 && tokens.size() == 150,
                 std::to_string(tokens.size()) + " tokens");
  }));
  return out;
}

std::vector<Check> diagnostics_checks() {
  std::vector<Check> out;
  Rng rng(801);
  out.push_back(guarded("usage", [&] {
    std::vector<std::uint64_t> hist(100);
    for (auto& c : hist) c = 1 + uniform_index(rng, 50);
    hist[37] = 0;
    const auto h = codebook_health(hist);
    out.push_back(holds("dead-code ratio = 1% exactly", h.dead_ratio == 0.01, fmt("%.17g", h.dead_ratio)));
    return holds("usage_rate = 99/100 exactly (one unused of K = 100)", h.usage_rate == 0.99 && h.used == 99,
                 fmt("%.17g", h.usage_rate));
  }));
  out.push_back(guarded("collision", [&] {
    std::vector<TokenSequence> corpus;
    for (int i = 0; i < 199; ++i) {
      TokenSequence s;
      s.window_id = "w" + std::to_string(i);
      s.tokens = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i % 7), 3u, 1u};
      corpus.push_back(s);
    }
    TokenSequence dup = corpus[42];
    dup.window_id = "dup";
    corpus.push_back(dup);
    const auto report = codebook_diagnostics(assignment_histograms(corpus, 2, 256), corpus);
    return holds("collision rate = 0.5% exactly (one duplicate among 200)",
                 report.collision_rate == 0.005 && report.sequences == 200, fmt("%.17g", report.collision_rate));
  }));
  out.push_back(guarded("single code", [&] {
    std::vector<std::uint64_t> hist(64, 0);
    hist[5] = 1000;
    const auto h = codebook_health(hist);
    return holds("single used code -> perplexity 1, usage 1/K", h.perplexity == 1.0 && h.usage_rate == 1.0 / 64.0);
  }));
  return out;
}

std::vector<Check> format_checks() {
  std::vector<Check> out;
  auto round_trip = [&](const std::string& name, const Bytes& first, const std::function<Bytes(const Bytes&)>& again) {
    out.push_back(guarded(name, [&] {
      const Bytes second = again(first);
      return holds(name + " write -> read -> write byte-identical", second == first,
                   std::to_string(first.size()) + " bytes");
    }));
  };

  const BodyModel body = fixtures::tube_chain_body();
  MotionSequence motion = fixtures::fixture_motion(3, 1.0, 60.0);
  round_trip("GMC1 body+motion", write_motion_container(body, &motion), [](const Bytes& b) {
    const auto c = load_motion_container(std::span<const std::uint8_t>(b));
    return write_motion_container(c.body, c.motion ? &*c.motion : nullptr);
  });
  fixtures::attach_posed_vertices(body, motion);
  round_trip("GMC1 with posed vertices", write_motion_container(body, &motion), [](const Bytes& b) {
    const auto c = load_motion_container(std::span<const std::uint8_t>(b));
    return write_motion_container(c.body, c.motion ? &*c.motion : nullptr);
  });
  round_trip("GMC1 body only", write_motion_container(body, nullptr), [](const Bytes& b) {
    const auto c = load_motion_container(std::span<const std::uint8_t>(b));
    return write_motion_container(c.body, c.motion ? &*c.motion : nullptr);
  });
  round_trip("GIW1", write_window_archive(fixtures::fixture_archive(901)), [](const Bytes& b) {
    return write_window_archive(read_window_archive(std::span<const std::uint8_t>(b)));
  });
  round_trip("GIW1 empty", write_window_archive(WindowArchive{60.0, body.segment_names, {}}), [](const Bytes& b) {
    return write_window_archive(read_window_archive(std::span<const std::uint8_t>(b)));
  });
  round_trip("GPW1", write_pretraining_shard(fixtures::fixture_shard(902)), [](const Bytes& b) {
    return write_pretraining_shard(read_pretraining_shard(std::span<const std::uint8_t>(b)));
  });
  round_trip("GCB1", write_codebooks(fixtures::fixture_codebooks(903)), [](const Bytes& b) {
    return write_codebooks(read_codebooks(std::span<const std::uint8_t>(b)));
  });
  Rng rng(904);
  MatrixBundle bundle{{"a", "b"}, {gaussian(rng, 5, 3), gaussian(rng, 0, 4)}};
  round_trip("GMX1", write_matrix_bundle(bundle), [](const Bytes& b) {
    return write_matrix_bundle(read_matrix_bundle(std::span<const std::uint8_t>(b)));
  });
  return out;
}

std::vector<Check> noise_prior_checks() {
  std::vector<Check> out;
  const double rate = 100.0;
  const std::size_t n = 12000;
  auto run = [&](const std::string& name, const NoisePrior& truth, double gravity, std::uint64_t seed) {
    out.push_back(guarded(name, [&] {
      Rng rng(seed);
      const Signal stream = fixtures::bias_white_stream(n, truth, gravity, rng);
      const NoisePrior est = estimate_noise_prior(stream, rate, QuietWindowConfig{});
      double std_rel = 0.0, bias_z = 0.0;
      for (int c = 0; c < 3; ++c) {
        std_rel = std::max(std_rel, std::abs(est.accel_std[c] / truth.accel_std[c] - 1.0));
        std_rel = std::max(std_rel, std::abs(est.gyro_std[c] / truth.gyro_std[c] - 1.0));
        bias_z = std::max(bias_z, std::abs(est.accel_bias[c] - truth.accel_bias[c]) /
                                      (truth.accel_std[c] / std::sqrt(static_cast<double>(n))));
        bias_z = std::max(bias_z, std::abs(est.gyro_bias[c] - truth.gyro_bias[c]) /
                                      (truth.gyro_std[c] / std::sqrt(static_cast<double>(n))));
      }
      out.push_back(within(name + ": std within 10%", std_rel, 0.10, "max relative std error"));
      return within(name + ": bias within 3 sigma/sqrt(n)", bias_z, 3.0, "max |error| in units of sigma/sqrt(n)");
    }));
  };
  NoisePrior resting;
  resting.accel_std = Vec3(0.010, 0.012, 0.015);
  resting.gyro_std = Vec3(0.002, 0.003, 0.0025);
  resting.accel_bias = Vec3(0.0, 0.0, 0.04);  // horizontal bias is indistinguishable from tilt
  resting.gyro_bias = Vec3(0.004, -0.006, 0.002);
  run("noise prior, resting stream", resting, kStandardGravity, 1001);

  NoisePrior free = resting;
  free.accel_bias = Vec3(0.03, -0.02, 0.05);
  run("noise prior, gravity-free stream", free, 0.0, 1002);
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"kinematics", "frames", "masking", "losses", "pq", "formats", "all"};
  return names;
}

SuiteResult run_suite(const std::string& name) {
  using Gen = std::function<std::vector<Check>()>;
  static const std::map<std::string, std::vector<Gen>> table = {
      {"kinematics", {[] { return kinematics_checks(); }, [] { return equivariance_checks(); }}},
      {"frames", {[] { return frame_checks(); }, [] { return placement_rule_checks(); }}},
      {"masking", {[] { return masking_checks(); }}},
      {"losses", {[] { return loss_checks(); }}},
      {"pq", {[] { return pq_checks(); }, [] { return diagnostics_checks(); }}},
      {"formats", {[] { return format_checks(); }, [] { return noise_prior_checks(); }}},
  };
  std::vector<Gen> gens;
  if (name == "all") {
    for (const auto& n : suite_names())
      if (n != "all") gens.insert(gens.end(), table.at(n).begin(), table.at(n).end());
  } else {
    const auto it = table.find(name);
    if (it == table.end()) throw ValidationError("unknown suite: " + name);
    gens = it->second;
  }
  SuiteResult r;
  r.suite = name;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& g : gens) {
    auto checks = g();
    r.checks.insert(r.checks.end(), checks.begin(), checks.end());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void print_check(std::ostream& os, const Check& c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "measured=%.3e tol=%.1e", c.measured, c.tolerance);
  os << (c.passed ? "PASS  " : "FAIL  ") << c.name << "  " << buf;
  if (!c.detail.empty()) os << "  (" << c.detail << ")";
  os << '\n';
}

void print_suite(std::ostream& os, const SuiteResult& r) {
  for (const auto& c : r.checks) print_check(os, c);
  std::size_t failed = 0;
  for (const auto& c : r.checks) failed += !c.passed;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f s", r.seconds);
  os << "suite " << r.suite << ": " << (r.checks.size() - failed) << "/" << r.checks.size() << " passed in " << buf
     << '\n';
}

}  // namespace geomimu::verify
