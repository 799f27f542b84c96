#pragma once

#include "geomimu/giw1.hpp"
#include "geomimu/imu_sim.hpp"
#include "geomimu/placement.hpp"
#include "geomimu/random.hpp"

#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace geomimu {

enum class ViewId { kA, kB, kSingle };

std::string to_string(ViewId id);

struct SegmentSetup {
  std::size_t vertex = 0;
  Mat3 mount = Mat3::Identity();
};

/// Full-body IMU graph sample: T×S×6 signal plus per-segment visibility.
struct GraphWindow {
  std::size_t frames = 0;
  std::size_t segments = 0;
  std::vector<double> signal;  // t-major, then segment, then channel
  std::vector<bool> visibility;
  ViewId view = ViewId::kSingle;
  std::string window_id;
  std::vector<SegmentSetup> setups;

  GraphWindow() = default;
  GraphWindow(std::size_t frames, std::size_t segments);

  double& at(std::size_t t, std::size_t s, std::size_t c) { return signal[(t * segments + s) * 6 + c]; }
  double at(std::size_t t, std::size_t s, std::size_t c) const { return signal[(t * segments + s) * 6 + c]; }
  std::vector<std::size_t> visible_segments() const;
};

/// Per-segment choice for one view: index into that segment's option list
/// and the sampled mount rotation.
struct ViewSpec {
  struct Choice {
    std::size_t option = 0;
    Mat3 mount = Mat3::Identity();
  };
  std::vector<Choice> choices;
  std::uint64_t seed = 0;
};

struct ViewConfig {
  double in_plane_range = std::numbers::pi;              // ±180°
  double tilt_range = 10.0 * std::numbers::pi / 180.0;   // ±10°
  bool include_degenerate = false;
  std::size_t window_frames = 300;
  std::vector<NoisePrior> priors;  // empty: noise off
  std::uint64_t run_seed = 0;      // noise-prior assignment
  Vec3 gravity = default_gravity();
};

/// Candidates grouped by segment; degenerate-tangent ones dropped unless
/// requested.
using CandidatePool = std::vector<std::vector<PlacementCandidate>>;
CandidatePool group_candidates(const std::vector<PlacementCandidate>& candidates,
                               std::size_t segments, bool include_degenerate);

/// Uniform option per segment, then a mount rotation, segment by segment.
ViewSpec sample_full_view(std::span<const std::size_t> options_per_segment, const ViewConfig& cfg,
                          Rng& rng);
ViewSpec sample_full_view(const CandidatePool& pool, const ViewConfig& cfg, Rng& rng);

/// accel → Δ·a, gyro → Δ·ω per row.
Signal rotate_imu_signal(const Signal& window, const Mat3& delta);

/// Frames [begin, end) plus up to one frame of margin on each side so that
/// central differences inside the range match the full-sequence result.
struct MotionSlice {
  MotionSequence motion;
  std::size_t offset = 0;  // index of `begin` inside the slice
};
MotionSlice slice_motion(const MotionSequence& motion, std::size_t begin, std::size_t end);

/// Simulates one view: for each segment the chosen candidate, mounted by the
/// chosen rotation, over frames [start, start + T).
GraphWindow build_view(const MotionSequence& motion, const CandidatePool& pool, const ViewSpec& spec,
                       std::size_t start_frame, const ViewConfig& cfg, ViewId id);

/// Same, from precomputed identity-or-not mounted windows: the archived
/// signal is rotated by the chosen mount (Δᵀ).
GraphWindow build_view_from_archive(const std::vector<std::vector<const ArchivedWindow*>>& options,
                                    const ViewSpec& spec, ViewId id);

struct ViewPair {
  GraphWindow a;
  GraphWindow b;
  ViewSpec spec_a;
  ViewSpec spec_b;
};

ViewPair build_paired_views_seeded(const MotionSequence& motion, const CandidatePool& pool,
                                   const ViewConfig& cfg, std::size_t start_frame,
                                   std::uint64_t seed_a, std::uint64_t seed_b);

/// Two independent views of the same motion window; the seeds for A and B
/// are the next two draws of `rng`.
ViewPair build_paired_views(const MotionSequence& motion, const CandidatePool& pool,
                            const ViewConfig& cfg, std::size_t start_frame, Rng& rng);

/// k ~ U{min_visible..min(max_visible, S)}, then k distinct segments,
/// returned sorted.
std::vector<std::size_t> sample_visibility_mask(std::size_t segments, Rng& rng,
                                                std::size_t min_visible = 1,
                                                std::size_t max_visible = 5);

/// Zero-fills and flags every segment outside `visible`.
GraphWindow apply_mask(const GraphWindow& window, std::span<const std::size_t> visible);

/// Start frames of non-overlapping (or strided) windows of `window_frames`.
std::vector<std::size_t> window_starts(std::size_t total_frames, std::size_t window_frames,
                                       std::size_t stride);

}  // namespace geomimu
