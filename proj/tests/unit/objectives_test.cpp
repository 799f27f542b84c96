#include "support.hpp"

#include "geomimu/objectives.hpp"
#include "geomimu/verify/oracles.hpp"

using namespace geomimu;
using namespace geomimu::test;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

Eigen::MatrixXd unit_rows(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m = gaussian(rows, cols, rng);
  m.rowwise().normalize();
  return m;
}

std::vector<Latent> latents(std::size_t n, Eigen::Index t, Eigen::Index d, Rng& rng) {
  std::vector<Latent> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(gaussian(t, d, rng));
  return out;
}

double rel(double a, long double b) { return std::abs(a - static_cast<double>(b)) / std::max(1.0, std::abs(static_cast<double>(b))); }

}  // namespace

TEST_SUITE("objectives") {

TEST_CASE("sequence cosine similarity") {
  Rng rng(1);
  const Latent x = gaussian(4, 3, rng);
  CHECK(seq_cosine_similarity(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(seq_cosine_similarity(x, -x) == doctest::Approx(-1.0).epsilon(1e-15));
  Latent a(2, 2), b(2, 2);
  a << 1, 0, 1, 1;
  b << 0, 3, 2, 2;
  CHECK(seq_cosine_similarity(a, b) == doctest::Approx(0.5).epsilon(1e-15));
  Latent z = x;
  z.row(2).setZero();
  CHECK_THROWS_AS(seq_cosine_similarity(x, z), ValidationError);
  CHECK_THROWS_AS(seq_cosine_similarity(x, gaussian(3, 3, rng)), ValidationError);
}

TEST_CASE("softmax NLL does not depend on the stabilizer") {
  const std::vector<double> l = {0.3, -1.2, 2.5, 0.0};
  const double ref = softmax_nll(l, 2);
  CHECK(std::abs(softmax_nll(l, 2, 0.0) - ref) <= 1e-14);
  CHECK(std::abs(softmax_nll(l, 2, -7.0) - ref) <= 1e-13);
  CHECK_THROWS_AS(softmax_nll(l, 4), ValidationError);
}

TEST_CASE("InfoNCE closed forms") {
  Rng rng(2);
  const auto one = latents(1, 3, 4, rng);
  CHECK(infonce_cross_view(one, one, 0.1) == 0.0);

  // s(n,n) = 1, s(n,m) = 0.
  Latent e1(1, 2), e2(1, 2);
  e1 << 1, 0;
  e2 << 0, 1;
  const std::vector<Latent> p = {e1, e2};
  const double want = -std::log(std::exp(10.0) / (std::exp(10.0) + 1.0));
  CHECK(std::abs(infonce_cross_view(p, p, 0.1) - want) <= 1e-15);
  CHECK(want == doctest::Approx(4.54e-5).epsilon(1e-3));

  const std::vector<Latent> same = {e1, e1, e1};
  CHECK(std::abs(infonce_cross_view(same, same, 0.1) - std::log(3.0)) <= 1e-15);
  CHECK_THROWS_WITH_AS(infonce_cross_view(p, p, 0.0), "temperature must be positive", ValidationError);
  CHECK_THROWS_AS(infonce_cross_view(p, one, 0.1), ValidationError);
}

TEST_CASE("MCVPCL") {
  Rng rng(3);
  const auto one = latents(1, 2, 3, rng);
  CHECK(mcvpcl_loss(one, one, one, one, 0.1) == 0.0);

  const auto pab = latents(8, 4, 16, rng), tb = latents(8, 4, 16, rng);
  const auto pba = latents(8, 4, 16, rng), ta = latents(8, 4, 16, rng);
  const double v = mcvpcl_loss(pab, tb, pba, ta, 0.1);
  CHECK(v == mcvpcl_loss(pba, ta, pab, tb, 0.1));
  CHECK(rel(v, oracles::mcvpcl(pab, tb, pba, ta, 0.1)) <= 1e-10);
}

TEST_CASE("commitment loss") {
  Rng rng(4);
  const Latent z = gaussian(5, 8, rng);
  CHECK(commitment_loss(z, z, 2) == 0.0);
  Latent a(1, 2), e = Latent::Zero(1, 2);
  a << 1, 0;
  CHECK(commitment_loss(a, e, 1) == 0.5);

  const Latent codes = gaussian(5, 8, rng);
  Latent z2(10, 8), c2(10, 8);
  z2 << z, z;
  c2 << codes, codes;
  CHECK(std::abs(commitment_loss(z2, c2, 2) - commitment_loss(z, codes, 2)) <= 1e-14);
  CHECK(rel(commitment_loss(z, codes, 4), oracles::commitment(z, codes, 4)) <= 1e-10);
  CHECK_THROWS_AS(commitment_loss(z, codes, 3), ValidationError);
}

TEST_CASE("smooth L1") {
  Eigen::MatrixXd x(1, 1), y = Eigen::MatrixXd::Zero(1, 1);
  CHECK(smooth_l1(y, y) == 0.0);
  x << 0.5;
  CHECK(smooth_l1(x, y) == 0.125);
  x << 2.0;
  CHECK(smooth_l1(x, y) == 1.5);
  CHECK_THROWS_AS(smooth_l1(x, Eigen::MatrixXd::Zero(2, 1)), ValidationError);
}

TEST_CASE("ITC") {
  Rng rng(5);
  const EmbeddingBatch one(unit_rows(1, 4, rng));
  CHECK(itc_loss(one, one, 0.05) == 0.0);

  const Eigen::MatrixXd imu = unit_rows(16, 32, rng), text = unit_rows(16, 32, rng);
  const double v = itc_loss(EmbeddingBatch(imu), EmbeddingBatch(text), 0.05);
  CHECK(v == itc_loss(EmbeddingBatch(text), EmbeddingBatch(imu), 0.05));
  CHECK(rel(v, oracles::itc(imu, text, 0.05)) <= 1e-10);
  CHECK_THROWS_AS(EmbeddingBatch(gaussian(2, 3, rng) * 3.0), ValidationError);
}

TEST_CASE("label contrastive") {
  Rng rng(6);
  const Eigen::MatrixXd h = unit_rows(4, 8, rng);
  CHECK(label_contrastive_loss(EmbeddingBatch(h, {"a", "b", "c", "d"}), 0.05) == 0.0);

  Eigen::MatrixXd twin(2, 8);
  twin.row(0) = h.row(0);
  twin.row(1) = h.row(0);
  CHECK(label_contrastive_loss(EmbeddingBatch(twin, {"x", "x"}), 0.05) == 0.0);

  const Eigen::MatrixXd big = unit_rows(12, 16, rng);
  std::vector<std::string> labels;
  for (int i = 0; i < 12; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i % 3)));
  CHECK(rel(label_contrastive_loss(EmbeddingBatch(big, labels), 0.1), oracles::label_contrastive(big, labels, 0.1)) <=
        1e-10);
  CHECK_THROWS_AS(label_contrastive_loss(EmbeddingBatch(big), 0.1), ValidationError);
  CHECK_THROWS_AS(EmbeddingBatch(big, {"a"}), ValidationError);
}

TEST_CASE("default weights and temperatures") {
  CHECK(ObjectiveDefaults::encoder_tau == 0.1);
  CHECK(ObjectiveDefaults::motion_language_tau == 0.05);
  CHECK(ObjectiveDefaults::lm_weight == 1.0);
  CHECK(ObjectiveDefaults::contrastive_weight == 2.0);
}

}
