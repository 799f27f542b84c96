#include "geomimu/setup_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace geomimu {

std::string to_string(ViewId id) {
  switch (id) {
    case ViewId::kA: return "A";
    case ViewId::kB: return "B";
    case ViewId::kSingle: return "single";
  }
  return "single";
}

GraphWindow::GraphWindow(std::size_t frames_, std::size_t segments_)
    : frames(frames_),
      segments(segments_),
      signal(frames_ * segments_ * 6, 0.0),
      visibility(segments_, true),
      setups(segments_) {}

std::vector<std::size_t> GraphWindow::visible_segments() const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < segments; ++s)
    if (visibility[s]) out.push_back(s);
  return out;
}

CandidatePool group_candidates(const std::vector<PlacementCandidate>& candidates,
                               std::size_t segments, bool include_degenerate) {
  CandidatePool pool(segments);
  for (const auto& c : candidates) {
    if (c.segment >= segments) throw ValidationError("candidate segment out of range");
    if (c.degenerate && !include_degenerate) continue;
    pool[c.segment].push_back(c);
  }
  return pool;
}

ViewSpec sample_full_view(std::span<const std::size_t> options_per_segment, const ViewConfig& cfg,
                          Rng& rng) {
  ViewSpec spec;
  spec.choices.resize(options_per_segment.size());
  for (std::size_t s = 0; s < options_per_segment.size(); ++s) {
    if (options_per_segment[s] == 0)
      throw ValidationError("segment " + std::to_string(s) + " has no usable candidate");
    spec.choices[s].option = static_cast<std::size_t>(uniform_index(rng, options_per_segment[s]));
    spec.choices[s].mount = mounting_rotation(rng, cfg.in_plane_range, cfg.tilt_range);
  }
  return spec;
}

ViewSpec sample_full_view(const CandidatePool& pool, const ViewConfig& cfg, Rng& rng) {
  std::vector<std::size_t> counts(pool.size());
  for (std::size_t s = 0; s < pool.size(); ++s) counts[s] = pool[s].size();
  return sample_full_view(counts, cfg, rng);
}

Signal rotate_imu_signal(const Signal& window, const Mat3& delta) {
  if (((delta.transpose() * delta) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
      std::abs(delta.determinant() - 1.0) > 1e-6) {
    throw ValidationError("augmentation matrix is not a rotation");
  }
  if (delta == Mat3::Identity()) return window;
  Signal out(window.rows(), 6);
  for (Eigen::Index t = 0; t < window.rows(); ++t) {
    const Vec3 a = window.row(t).head<3>().transpose();
    const Vec3 w = window.row(t).tail<3>().transpose();
    out.row(t).head<3>() = (delta * a).transpose();
    out.row(t).tail<3>() = (delta * w).transpose();
  }
  return out;
}

MotionSlice slice_motion(const MotionSequence& motion, std::size_t begin, std::size_t end) {
  if (begin >= end || end > motion.frames) throw ValidationError("motion slice out of range");
  const std::size_t lo = begin > 0 ? begin - 1 : 0;
  const std::size_t hi = std::min(end + 1, motion.frames);
  MotionSlice out;
  out.offset = begin - lo;
  out.motion.rate = motion.rate;
  out.motion.segments = motion.segments;
  out.motion.frames = hi - lo;
  const std::size_t S = motion.segments;
  out.motion.positions.assign(motion.positions.begin() + static_cast<std::ptrdiff_t>(lo * S),
                              motion.positions.begin() + static_cast<std::ptrdiff_t>(hi * S));
  out.motion.orientations.assign(motion.orientations.begin() + static_cast<std::ptrdiff_t>(lo * S),
                                 motion.orientations.begin() + static_cast<std::ptrdiff_t>(hi * S));
  return out;
}

namespace {

void write_segment(GraphWindow& out, std::size_t s, const Signal& samples, std::size_t first_row) {
  for (std::size_t t = 0; t < out.frames; ++t)
    for (std::size_t c = 0; c < 6; ++c)
      out.at(t, s, c) = samples(static_cast<Eigen::Index>(first_row + t), static_cast<Eigen::Index>(c));
}

}  // namespace

GraphWindow build_view(const MotionSequence& motion, const CandidatePool& pool, const ViewSpec& spec,
                       std::size_t start_frame, const ViewConfig& cfg, ViewId id) {
  const std::size_t S = pool.size();
  const std::size_t T = cfg.window_frames;
  if (spec.choices.size() != S) throw ValidationError("view spec does not cover every segment");
  if (start_frame + T > motion.frames) throw ValidationError("window extends past the motion");
  const MotionSlice slice = slice_motion(motion, start_frame, start_frame + T);

  GraphWindow out(T, S);
  out.view = id;
  for (std::size_t s = 0; s < S; ++s) {
    const auto& choice = spec.choices[s];
    const PlacementCandidate& cand = pool[s].at(choice.option);
    const NoisePrior* prior = assign_noise_prior(cfg.priors, cfg.run_seed, s, cand.vertex);
    const ImuWindow w = simulate_window(slice.motion, cand, choice.mount, prior, cfg.gravity,
                                        derive_seed(spec.seed, {s}));
    write_segment(out, s, w.samples, slice.offset);
    out.setups[s] = {cand.vertex, choice.mount};
  }
  return out;
}

GraphWindow build_view_from_archive(const std::vector<std::vector<const ArchivedWindow*>>& options,
                                    const ViewSpec& spec, ViewId id) {
  const std::size_t S = options.size();
  if (spec.choices.size() != S) throw ValidationError("view spec does not cover every segment");
  const std::size_t T = static_cast<std::size_t>(options.at(0).at(spec.choices[0].option)->samples.rows());
  GraphWindow out(T, S);
  out.view = id;
  for (std::size_t s = 0; s < S; ++s) {
    const ArchivedWindow& w = *options[s].at(spec.choices[s].option);
    if (static_cast<std::size_t>(w.samples.rows()) != T) throw ValidationError("archived windows differ in length");
    write_segment(out, s, rotate_imu_signal(w.samples, spec.choices[s].mount.transpose()), 0);
    out.setups[s] = {w.vertex, w.mount_rotation * spec.choices[s].mount};
  }
  return out;
}

ViewPair build_paired_views_seeded(const MotionSequence& motion, const CandidatePool& pool,
                                   const ViewConfig& cfg, std::size_t start_frame,
                                   std::uint64_t seed_a, std::uint64_t seed_b) {
  ViewPair pair;
  Rng rng_a(seed_a);
  Rng rng_b(seed_b);
  pair.spec_a = sample_full_view(pool, cfg, rng_a);
  pair.spec_a.seed = seed_a;
  pair.spec_b = sample_full_view(pool, cfg, rng_b);
  pair.spec_b.seed = seed_b;
  pair.a = build_view(motion, pool, pair.spec_a, start_frame, cfg, ViewId::kA);
  pair.b = build_view(motion, pool, pair.spec_b, start_frame, cfg, ViewId::kB);
  return pair;
}

ViewPair build_paired_views(const MotionSequence& motion, const CandidatePool& pool,
                            const ViewConfig& cfg, std::size_t start_frame, Rng& rng) {
  const std::uint64_t seed_a = rng();
  const std::uint64_t seed_b = rng();
  return build_paired_views_seeded(motion, pool, cfg, start_frame, seed_a, seed_b);
}

std::vector<std::size_t> sample_visibility_mask(std::size_t segments, Rng& rng,
                                                std::size_t min_visible, std::size_t max_visible) {
  if (segments == 0) throw ValidationError("mask needs at least one segment");
  const std::size_t hi = std::min(max_visible, segments);
  const std::size_t lo = std::max<std::size_t>(1, min_visible);
  if (lo > hi) throw ValidationError("mask bounds are empty");
  const std::size_t k = lo + static_cast<std::size_t>(uniform_index(rng, hi - lo + 1));

  std::vector<std::size_t> idx(segments);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, segments - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

GraphWindow apply_mask(const GraphWindow& window, std::span<const std::size_t> visible) {
  if (visible.empty()) throw ValidationError("visible set is empty");
  std::vector<bool> keep(window.segments, false);
  for (auto s : visible) {
    if (s >= window.segments) throw ValidationError("visible segment out of range");
    keep[s] = true;
  }
  GraphWindow out = window;
  for (std::size_t s = 0; s < window.segments; ++s) {
    if (keep[s] && window.visibility[s]) continue;
    out.visibility[s] = false;
    for (std::size_t t = 0; t < window.frames; ++t)
      for (std::size_t c = 0; c < 6; ++c) out.at(t, s, c) = 0.0;
  }
  return out;
}

std::vector<std::size_t> window_starts(std::size_t total_frames, std::size_t window_frames,
                                       std::size_t stride) {
  if (window_frames == 0 || stride == 0) throw ValidationError("window length and stride must be positive");
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s + window_frames <= total_frames; s += stride) out.push_back(s);
  return out;
}

}  // namespace geomimu
