#pragma once

#include "geomimu/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geomimu {

// Framework-free reference values of the training objectives. Stop-gradient
// on targets and codes is a training-time contract and does not change any
// value computed here.

/// Default temperatures and weights used by the trainers these mirror.
struct ObjectiveDefaults {
  static constexpr double encoder_tau = 0.1;
  static constexpr double motion_language_tau = 0.05;
  static constexpr double lm_weight = 1.0;
  static constexpr double contrastive_weight = 2.0;
};

/// Mean over time of per-step cosine similarity, in [−1, 1].
double seq_cosine_similarity(const Latent& pred, const Latent& target);

/// −log softmax(logits)[target], stabilized by subtracting `stabilizer`
/// (the row maximum when not given). The value does not depend on the
/// stabilizer beyond rounding.
double softmax_nll(std::span<const double> logits, std::size_t target,
                   std::optional<double> stabilizer = std::nullopt);

/// One-direction cross-view predictive InfoNCE with batch negatives.
double infonce_cross_view(std::span<const Latent> preds, std::span<const Latent> targets, double tau);

/// L(A→B) + L(B→A).
double mcvpcl_loss(std::span<const Latent> preds_ab, std::span<const Latent> targets_b,
                   std::span<const Latent> preds_ba, std::span<const Latent> targets_a, double tau);

/// Σ_j P/(T'·d̄) Σ_ℓ ‖z̄_ℓj − e_jκ‖² over the P contiguous chunks of each row.
double commitment_loss(const Latent& chunks, const Latent& codes, std::size_t codebooks);

/// Mean SmoothL1 with transition at |e| = 1.
double smooth_l1(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// N×d unit-norm rows with optional per-row labels.
class EmbeddingBatch {
 public:
  explicit EmbeddingBatch(Eigen::MatrixXd vectors, std::vector<std::string> labels = {});

  const Eigen::MatrixXd& vectors() const { return vectors_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return static_cast<std::size_t>(vectors_.rows()); }
  bool has_labels() const { return !labels_.empty(); }

 private:
  Eigen::MatrixXd vectors_;
  std::vector<std::string> labels_;
};

/// Symmetric IMU-text InfoNCE over dot products, scaled by 1/(2N).
double itc_loss(const EmbeddingBatch& imu, const EmbeddingBatch& text, double tau);

/// Supervised contrastive loss with same-label positives; anchors without
/// a positive are skipped, and a batch without positives scores 0.
double label_contrastive_loss(const EmbeddingBatch& batch, double tau);

}  // namespace geomimu
