#pragma once

#include "geomimu/common.hpp"
#include "geomimu/random.hpp"
#include "geomimu/setup_sampler.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace geomimu {

/// T'×P code indices.
using IndexMatrix = Eigen::Matrix<std::uint32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// P product codebooks of K entries each, with their EMA statistics.
struct Codebooks {
  std::size_t P = 0;
  std::size_t K = 0;
  std::size_t dim = 0;
  double decay = 0.99;
  std::uint64_t seed = 0;
  std::vector<Eigen::MatrixXd> codes;       // P of K×dim
  std::vector<Eigen::VectorXd> ema_counts;  // P of K
  std::vector<Eigen::MatrixXd> ema_sums;    // P of K×dim
  nlohmann::json training_summary = nlohmann::json::object();

  Codebooks() = default;
  Codebooks(std::size_t P, std::size_t K, std::size_t dim, double decay = 0.99);

  std::size_t width() const { return P * dim; }
  void validate() const;
};

struct QuantizeResult {
  IndexMatrix indices;
  Latent quantized;
};

/// Nearest code per contiguous chunk, ties to the lowest index.
QuantizeResult quantize(const Latent& latent, const Codebooks& books);

/// Single-threaded reference for `quantize`.
QuantizeResult quantize_serial(const Latent& latent, const Codebooks& books);

/// Smoothing constant of the code estimate (sums + ε·m) / (counts + ε).
inline constexpr double kEmaEpsilon = 1e-5;

/// One EMA step from a batch of latent rows and their assignments. The
/// smoothing prior m is the batch mean of each codebook's chunks, or the
/// current code when the batch is empty.
void ema_update(Codebooks& books, const Latent& batch, const IndexMatrix& assignments);

/// Replaces codes whose EMA count is below `threshold`·mean(count) by
/// batch chunks; returns how many were replaced across all codebooks.
std::size_t dead_code_refresh(Codebooks& books, const Latent& batch, Rng& rng, double threshold = 0.2);

struct FitConfig {
  std::size_t P = 2;
  std::size_t K = 2048;
  std::size_t dim = 64;
  double decay = 0.99;
  std::size_t epochs = 10;
  std::size_t batch_rows = 256;
  double dead_threshold = 0.2;
  std::uint64_t seed = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double commitment = 0.0;
  std::vector<double> perplexity;  // per codebook
  std::size_t refreshed = 0;
};

struct FitResult {
  Codebooks books;
  std::vector<EpochLog> log;
  std::vector<std::string> warnings;
};

/// k-means++ seeding over sampled chunks, then epochs of shuffled
/// mini-batches of {quantize, ema_update, dead_code_refresh}.
FitResult fit_codebooks(std::span<const Latent> latents, const FitConfig& cfg);

/// Row-major flattening, time-major then codebook.
std::vector<std::uint32_t> interleave_tokens(const IndexMatrix& indices);
IndexMatrix deinterleave(std::span<const std::uint32_t> tokens, std::size_t P);

struct TokenSequence {
  std::string window_id;
  std::vector<std::size_t> visible_segments;
  std::vector<std::uint32_t> tokens;
};

nlohmann::json to_json(const TokenSequence& seq);
TokenSequence token_sequence_from_json(const nlohmann::json& j);

struct CodebookHealth {
  std::size_t K = 0;
  std::size_t used = 0;
  std::uint64_t assignments = 0;
  double usage_rate = 0.0;
  double dead_ratio = 0.0;
  double perplexity = 0.0;
  double top1_mass = 0.0;
  double top10_mass = 0.0;
};

/// Usage, perplexity and top-m mass of one assignment histogram.
CodebookHealth codebook_health(std::span<const std::uint64_t> histogram);

/// Summed probability of the m most-used codes.
double top_mass(std::span<const std::uint64_t> histogram, std::size_t m);

/// (total − distinct) / total over whole token sequences.
double collision_rate(std::span<const std::vector<std::uint32_t>> sequences);

struct DiagnosticsReport {
  std::vector<CodebookHealth> books;
  std::size_t sequences = 0;
  std::size_t distinct_sequences = 0;
  double collision_rate = 0.0;
};

/// Per-codebook assignment counts recovered from interleaved tokens.
std::vector<std::vector<std::uint64_t>> assignment_histograms(std::span<const TokenSequence> corpus,
                                                              std::size_t P, std::size_t K);

DiagnosticsReport codebook_diagnostics(const std::vector<std::vector<std::uint64_t>>& histograms,
                                       std::span<const TokenSequence> corpus);

/// Fixed random map with orthonormal columns (or rows when the feature
/// width is smaller than the latent width).
class FeatureProjection {
 public:
  FeatureProjection(std::size_t features, std::size_t latent_dim, std::uint64_t seed);
  const Eigen::MatrixXd& matrix() const { return map_; }
  std::size_t features() const { return static_cast<std::size_t>(map_.rows()); }
  std::size_t latent_dim() const { return static_cast<std::size_t>(map_.cols()); }

 private:
  Eigen::MatrixXd map_;
};

inline constexpr std::uint64_t kFeaturizeSeed = 0x67656F6D696D75ULL;
inline constexpr std::size_t kTemporalStride = 4;

/// 12 statistics per segment plus a 6-value visibility summary.
inline std::size_t featurize_width(std::size_t segments) { return 12 * segments + 6; }

/// Deterministic stand-in encoder: 4× temporal pooling (last frame
/// replicated to pad), per-segment channel means and standard deviations
/// (zeros for hidden segments), the mean of channel means over visible
/// segments, then a fixed orthogonal projection to `latent_dim`.
Latent reference_featurize(const GraphWindow& window, const FeatureProjection& projection);
Latent reference_featurize(const GraphWindow& window, std::size_t latent_dim);

}  // namespace geomimu
