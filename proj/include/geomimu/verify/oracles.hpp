#pragma once

#include "geomimu/body_model.hpp"
#include "geomimu/random.hpp"
#include "geomimu/tokenizer.hpp"

#include <span>
#include <string>
#include <vector>

namespace geomimu::oracles {

// Deliberately naive restatements of the library's definitions, written
// without sharing code with it.

/// Vertex v belongs to segment s when fewer than two of v's nonzero
/// influences outrank one of s's joints (higher weight, or equal weight
/// on a lower joint id).
std::vector<std::vector<std::size_t>> top2_candidates(const BodyModel& body);

/// Every distance computed, then the first index attaining the minimum.
std::size_t nearest_code(const Eigen::RowVectorXd& chunk, const Eigen::MatrixXd& codes);
IndexMatrix exhaustive_quantize(const Latent& latent, const std::vector<Eigen::MatrixXd>& codes);

/// Best of `restarts` Lloyd runs from random data points.
Eigen::MatrixXd lloyd(const Eigen::MatrixXd& data, std::size_t K, std::size_t iterations, std::size_t restarts,
                      std::uint64_t seed);

/// Mean over points of the squared distance to the nearest centroid.
double inertia(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centroids);

long double infonce(std::span<const Latent> preds, std::span<const Latent> targets, double tau);
long double mcvpcl(std::span<const Latent> preds_ab, std::span<const Latent> targets_b,
                   std::span<const Latent> preds_ba, std::span<const Latent> targets_a, double tau);
long double itc(const Eigen::MatrixXd& imu, const Eigen::MatrixXd& text, double tau);
long double label_contrastive(const Eigen::MatrixXd& h, const std::vector<std::string>& labels, double tau);
long double commitment(const Latent& chunks, const Latent& codes, std::size_t P);
long double smooth_l1(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Upper tail of the chi-square distribution for an even number of degrees
/// of freedom.
double chi_square_sf_even(double x, unsigned dof);

}  // namespace geomimu::oracles
