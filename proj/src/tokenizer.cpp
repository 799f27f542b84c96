#include "geomimu/tokenizer.hpp"

#include "geomimu/kernels.hpp"
#include "geomimu/objectives.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace geomimu {

Codebooks::Codebooks(std::size_t P_, std::size_t K_, std::size_t dim_, double decay_)
    : P(P_), K(K_), dim(dim_), decay(decay_) {
  if (P == 0 || K == 0 || dim == 0) throw ValidationError("codebook shape must be positive");
  if (!(decay >= 0.0 && decay < 1.0)) throw ValidationError("decay must lie in [0, 1)");
  const auto k = static_cast<Eigen::Index>(K);
  const auto d = static_cast<Eigen::Index>(dim);
  codes.assign(P, Eigen::MatrixXd::Zero(k, d));
  ema_counts.assign(P, Eigen::VectorXd::Zero(k));
  ema_sums.assign(P, Eigen::MatrixXd::Zero(k, d));
}

void Codebooks::validate() const {
  if (codes.size() != P || ema_counts.size() != P || ema_sums.size() != P)
    throw ValidationError("codebook count mismatch");
  for (std::size_t j = 0; j < P; ++j) {
    if (static_cast<std::size_t>(codes[j].rows()) != K || static_cast<std::size_t>(codes[j].cols()) != dim)
      throw ValidationError("codebook " + std::to_string(j) + " has the wrong shape");
    if (!codes[j].allFinite()) throw ValidationError("codebook " + std::to_string(j) + " has non-finite codes");
    if ((ema_counts[j].array() < 0.0).any()) throw ValidationError("negative EMA count");
  }
}

QuantizeResult quantize(const Latent& latent, const Codebooks& books) {
  QuantizeResult out;
  kernels::nearest_codes_parallel(latent, books, out);
  return out;
}

QuantizeResult quantize_serial(const Latent& latent, const Codebooks& books) {
  QuantizeResult out;
  kernels::nearest_codes_serial(latent, books, out);
  return out;
}

void ema_update(Codebooks& books, const Latent& batch, const IndexMatrix& assignments) {
  if (static_cast<std::size_t>(batch.cols()) != books.width()) throw ValidationError("batch width mismatch");
  if (assignments.rows() != batch.rows() || static_cast<std::size_t>(assignments.cols()) != books.P)
    throw ValidationError("assignment shape mismatch");
  const auto n = batch.rows();
  const auto K = static_cast<Eigen::Index>(books.K);
  const auto dim = static_cast<Eigen::Index>(books.dim);
  const double d = books.decay;

  for (std::size_t j = 0; j < books.P; ++j) {
    const Eigen::Index off = static_cast<Eigen::Index>(j) * dim;
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, dim);
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(dim);
    for (Eigen::Index l = 0; l < n; ++l) {
      const auto k = static_cast<Eigen::Index>(assignments(l, static_cast<Eigen::Index>(j)));
      if (k >= K) throw ValidationError("assignment out of range");
      counts(k) += 1.0;
      sums.row(k) += batch.row(l).segment(off, dim);
      mean += batch.row(l).segment(off, dim);
    }
    if (n > 0) mean /= static_cast<double>(n);

    books.ema_counts[j] = d * books.ema_counts[j] + (1.0 - d) * counts;
    books.ema_sums[j] = d * books.ema_sums[j] + (1.0 - d) * sums;
    for (Eigen::Index k = 0; k < K; ++k) {
      const Eigen::RowVectorXd prior = n > 0 ? mean : Eigen::RowVectorXd(books.codes[j].row(k));
      books.codes[j].row(k) =
          (books.ema_sums[j].row(k) + kEmaEpsilon * prior) / (books.ema_counts[j](k) + kEmaEpsilon);
    }
  }
}

std::size_t dead_code_refresh(Codebooks& books, const Latent& batch, Rng& rng, double threshold) {
  if (static_cast<std::size_t>(batch.cols()) != books.width()) throw ValidationError("batch width mismatch");
  const auto n = static_cast<std::size_t>(batch.rows());
  const auto dim = static_cast<Eigen::Index>(books.dim);
  std::size_t refreshed = 0;

  for (std::size_t j = 0; j < books.P; ++j) {
    const double floor = threshold * books.ema_counts[j].mean();
    std::vector<Eigen::Index> dead;
    for (Eigen::Index k = 0; k < books.ema_counts[j].size(); ++k)
      if (books.ema_counts[j](k) < floor) dead.push_back(k);
    if (dead.empty()) continue;
    if (n == 0) throw ValidationError("dead codes exist but the batch is empty");

    std::vector<std::size_t> rows(dead.size());
    if (dead.size() <= n) {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t i = 0; i < dead.size(); ++i) {
        std::swap(idx[i], idx[i + static_cast<std::size_t>(uniform_index(rng, n - i))]);
        rows[i] = idx[i];
      }
    } else {
      for (auto& r : rows) r = static_cast<std::size_t>(uniform_index(rng, n));
    }

    const Eigen::Index off = static_cast<Eigen::Index>(j) * dim;
    for (std::size_t i = 0; i < dead.size(); ++i) {
      const Eigen::Index k = dead[i];
      books.codes[j].row(k) = batch.row(static_cast<Eigen::Index>(rows[i])).segment(off, dim);
      books.ema_counts[j](k) = floor;
      books.ema_sums[j].row(k) = floor * books.codes[j].row(k);
    }
    refreshed += dead.size();
  }
  return refreshed;
}

namespace {

double squared_distance(const Eigen::MatrixXd& x, Eigen::Index i, const Eigen::MatrixXd& y, Eigen::Index k) {
  double d = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double e = x(i, c) - y(k, c);
    d += e * e;
  }
  return d;
}

// k-means++ over `pool` rows of the chunk matrix; when the pool holds fewer
// than K distinct points the remaining codes are drawn with replacement.
Eigen::MatrixXd seed_codes(const Eigen::MatrixXd& chunks, std::size_t K, Rng& rng) {
  const auto n = static_cast<std::size_t>(chunks.rows());
  Eigen::MatrixXd codes(static_cast<Eigen::Index>(K), chunks.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t chosen = 0;
  auto take = [&](std::size_t row) {
    codes.row(static_cast<Eigen::Index>(chosen)) = chunks.row(static_cast<Eigen::Index>(row));
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(chunks, static_cast<Eigen::Index>(i), codes,
                                                static_cast<Eigen::Index>(chosen)));
    ++chosen;
  };

  take(static_cast<std::size_t>(uniform_index(rng, n)));
  while (chosen < K) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (!(total > 0.0)) break;
    const double r = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > r) break;
    }
    take(pick);
  }
  while (chosen < K) {
    codes.row(static_cast<Eigen::Index>(chosen)) =
        chunks.row(static_cast<Eigen::Index>(uniform_index(rng, n)));
    ++chosen;
  }
  return codes;
}

std::vector<double> perplexities(const IndexMatrix& indices, std::size_t K) {
  std::vector<double> out;
  for (Eigen::Index j = 0; j < indices.cols(); ++j) {
    std::vector<std::uint64_t> hist(K, 0);
    for (Eigen::Index l = 0; l < indices.rows(); ++l) ++hist[indices(l, j)];
    out.push_back(codebook_health(hist).perplexity);
  }
  return out;
}

}  // namespace

FitResult fit_codebooks(std::span<const Latent> latents, const FitConfig& cfg) {
  if (latents.empty()) throw ValidationError("latent dataset is empty");
  if (cfg.batch_rows == 0) throw ValidationError("batch size must be positive");
  FitResult result;
  result.books = Codebooks(cfg.P, cfg.K, cfg.dim, cfg.decay);
  Codebooks& books = result.books;
  books.seed = cfg.seed;

  Eigen::Index rows = 0;
  for (const auto& l : latents) {
    if (static_cast<std::size_t>(l.cols()) != books.width())
      throw ValidationError("latent width " + std::to_string(l.cols()) + " does not match P·dim = " +
                            std::to_string(books.width()));
    rows += l.rows();
  }
  if (rows == 0) throw ValidationError("latent dataset has no rows");
  Latent data(rows, static_cast<Eigen::Index>(books.width()));
  Eigen::Index at = 0;
  for (const auto& l : latents) {
    data.middleRows(at, l.rows()) = l;
    at += l.rows();
  }
  const auto n = static_cast<std::size_t>(rows);
  if (n < cfg.K)
    result.warnings.push_back("dataset has " + std::to_string(n) + " chunks per codebook, fewer than K = " +
                              std::to_string(cfg.K) + "; seeding samples with replacement");

  // Seeding looks at a bounded sample of chunks.
  Rng seed_rng(derive_seed(cfg.seed, {1}));
  const std::size_t pool_size = std::min(n, std::max<std::size_t>(8 * cfg.K, 1024));
  const auto dim = static_cast<Eigen::Index>(cfg.dim);
  for (std::size_t j = 0; j < cfg.P; ++j) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < pool_size && pool_size < n; ++i)
      std::swap(idx[i], idx[i + static_cast<std::size_t>(uniform_index(seed_rng, n - i))]);
    Eigen::MatrixXd pool(static_cast<Eigen::Index>(pool_size), dim);
    for (std::size_t i = 0; i < pool_size; ++i)
      pool.row(static_cast<Eigen::Index>(i)) =
          data.row(static_cast<Eigen::Index>(idx[i])).segment(static_cast<Eigen::Index>(j) * dim, dim);
    books.codes[j] = seed_codes(pool, cfg.K, seed_rng);
    books.ema_counts[j].setOnes();
    books.ema_sums[j] = books.codes[j];
  }

  Rng shuffle_rng(derive_seed(cfg.seed, {2}));
  Rng refresh_rng(derive_seed(cfg.seed, {3}));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_index(shuffle_rng, i))]);
    EpochLog entry;
    entry.epoch = epoch + 1;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_rows) {
      const std::size_t end = std::min(n, begin + cfg.batch_rows);
      Latent batch(static_cast<Eigen::Index>(end - begin), data.cols());
      for (std::size_t i = begin; i < end; ++i)
        batch.row(static_cast<Eigen::Index>(i - begin)) = data.row(static_cast<Eigen::Index>(order[i]));
      const QuantizeResult q = quantize(batch, books);
      ema_update(books, batch, q.indices);
      entry.refreshed += dead_code_refresh(books, batch, refresh_rng, cfg.dead_threshold);
    }
    const QuantizeResult full = quantize(data, books);
    entry.commitment = commitment_loss(data, full.quantized, cfg.P);
    entry.perplexity = perplexities(full.indices, cfg.K);
    result.log.push_back(std::move(entry));
  }

  nlohmann::json summary = {{"epochs", cfg.epochs}, {"chunks", n}, {"batch_rows", cfg.batch_rows}};
  if (!result.log.empty()) {
    summary["final_commitment"] = result.log.back().commitment;
    summary["final_perplexity"] = result.log.back().perplexity;
    std::size_t refreshed = 0;
    for (const auto& e : result.log) refreshed += e.refreshed;
    summary["refreshed"] = refreshed;
  }
  books.training_summary = summary;
  return result;
}

std::vector<std::uint32_t> interleave_tokens(const IndexMatrix& indices) {
  std::vector<std::uint32_t> out;
  out.reserve(static_cast<std::size_t>(indices.size()));
  for (Eigen::Index l = 0; l < indices.rows(); ++l)
    for (Eigen::Index j = 0; j < indices.cols(); ++j) out.push_back(indices(l, j));
  return out;
}

IndexMatrix deinterleave(std::span<const std::uint32_t> tokens, std::size_t P) {
  if (P == 0 || tokens.size() % P != 0)
    throw ValidationError("token count " + std::to_string(tokens.size()) + " is not divisible by P = " +
                          std::to_string(P));
  const auto rows = static_cast<Eigen::Index>(tokens.size() / P);
  IndexMatrix out(rows, static_cast<Eigen::Index>(P));
  for (std::size_t i = 0; i < tokens.size(); ++i)
    out(static_cast<Eigen::Index>(i / P), static_cast<Eigen::Index>(i % P)) = tokens[i];
  return out;
}

nlohmann::json to_json(const TokenSequence& seq) {
  return {{"window_id", seq.window_id}, {"visible_segments", seq.visible_segments}, {"tokens", seq.tokens}};
}

TokenSequence token_sequence_from_json(const nlohmann::json& j) {
  TokenSequence seq;
  try {
    seq.window_id = j.at("window_id").get<std::string>();
    seq.visible_segments = j.value("visible_segments", std::vector<std::size_t>{});
    seq.tokens = j.at("tokens").get<std::vector<std::uint32_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed token record: ") + e.what());
  }
  return seq;
}

double top_mass(std::span<const std::uint64_t> histogram, std::size_t m) {
  std::vector<std::uint64_t> sorted(histogram.begin(), histogram.end());
  const std::uint64_t total = std::accumulate(sorted.begin(), sorted.end(), std::uint64_t{0});
  if (total == 0) throw ValidationError("empty corpus");
  m = std::min(m, sorted.size());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m), sorted.end(),
                    std::greater<>());
  const std::uint64_t top = std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m),
                                            std::uint64_t{0});
  return static_cast<double>(top) / static_cast<double>(total);
}

CodebookHealth codebook_health(std::span<const std::uint64_t> histogram) {
  CodebookHealth h;
  h.K = histogram.size();
  if (h.K == 0) throw ValidationError("empty histogram");
  h.assignments = std::accumulate(histogram.begin(), histogram.end(), std::uint64_t{0});
  if (h.assignments == 0) throw ValidationError("empty corpus");

  std::uint64_t first_nonzero = 0;
  bool uniform = true;
  for (auto c : histogram) {
    if (c == 0) continue;
    if (h.used == 0) first_nonzero = c;
    uniform = uniform && c == first_nonzero;
    ++h.used;
  }
  h.usage_rate = static_cast<double>(h.used) / static_cast<double>(h.K);
  h.dead_ratio = static_cast<double>(h.K - h.used) / static_cast<double>(h.K);

  // Equal nonzero counts have entropy log(used); return it without rounding.
  if (uniform) {
    h.perplexity = static_cast<double>(h.used);
  } else {
    const double total = static_cast<double>(h.assignments);
    double entropy = 0.0;
    for (auto c : histogram) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / total;
      entropy -= p * std::log(p);
    }
    h.perplexity = std::clamp(std::exp(entropy), 1.0, static_cast<double>(h.used));
  }
  h.top1_mass = top_mass(histogram, 1);
  h.top10_mass = top_mass(histogram, 10);
  return h;
}

double collision_rate(std::span<const std::vector<std::uint32_t>> sequences) {
  if (sequences.empty()) throw ValidationError("empty corpus");
  std::set<std::vector<std::uint32_t>> distinct(sequences.begin(), sequences.end());
  return static_cast<double>(sequences.size() - distinct.size()) / static_cast<double>(sequences.size());
}

std::vector<std::vector<std::uint64_t>> assignment_histograms(std::span<const TokenSequence> corpus,
                                                              std::size_t P, std::size_t K) {
  if (P == 0 || K == 0) throw ValidationError("codebook shape must be positive");
  std::vector<std::vector<std::uint64_t>> hist(P, std::vector<std::uint64_t>(K, 0));
  for (const auto& seq : corpus) {
    if (seq.tokens.size() % P != 0)
      throw ValidationError("token sequence " + seq.window_id + " length is not divisible by P");
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      if (seq.tokens[i] >= K) throw ValidationError("token " + std::to_string(seq.tokens[i]) + " >= K");
      ++hist[i % P][seq.tokens[i]];
    }
  }
  return hist;
}

DiagnosticsReport codebook_diagnostics(const std::vector<std::vector<std::uint64_t>>& histograms,
                                       std::span<const TokenSequence> corpus) {
  if (corpus.empty()) throw ValidationError("empty corpus");
  DiagnosticsReport report;
  for (const auto& h : histograms) report.books.push_back(codebook_health(h));
  std::vector<std::vector<std::uint32_t>> seqs;
  seqs.reserve(corpus.size());
  for (const auto& s : corpus) seqs.push_back(s.tokens);
  report.sequences = seqs.size();
  report.distinct_sequences = std::set<std::vector<std::uint32_t>>(seqs.begin(), seqs.end()).size();
  report.collision_rate = collision_rate(seqs);
  return report;
}

FeatureProjection::FeatureProjection(std::size_t features, std::size_t latent_dim, std::uint64_t seed) {
  if (features == 0 || latent_dim == 0) throw ValidationError("projection shape must be positive");
  const auto n = static_cast<Eigen::Index>(std::max(features, latent_dim));
  Rng rng(derive_seed(seed, {features, latent_dim}));
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) g(r, c) = standard_normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  map_ = q.topLeftCorner(static_cast<Eigen::Index>(features), static_cast<Eigen::Index>(latent_dim));
}

Latent reference_featurize(const GraphWindow& window, const FeatureProjection& projection) {
  const std::size_t T = window.frames;
  const std::size_t S = window.segments;
  if (T == 0 || S == 0) throw ValidationError("window is empty");
  if (projection.features() != featurize_width(S))
    throw ValidationError("projection expects " + std::to_string(projection.features()) + " features, window gives " +
                          std::to_string(featurize_width(S)));
  const std::size_t pooled = (T + kTemporalStride - 1) / kTemporalStride;
  const auto visible = window.visible_segments();

  Eigen::MatrixXd feats = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pooled),
                                                static_cast<Eigen::Index>(featurize_width(S)));
  for (std::size_t l = 0; l < pooled; ++l) {
    const auto row = static_cast<Eigen::Index>(l);
    for (auto s : visible) {
      for (std::size_t c = 0; c < 6; ++c) {
        double vals[kTemporalStride];
        double mean = 0.0;
        for (std::size_t i = 0; i < kTemporalStride; ++i) {
          vals[i] = window.at(std::min(l * kTemporalStride + i, T - 1), s, c);
          mean += vals[i];
        }
        mean /= static_cast<double>(kTemporalStride);
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= static_cast<double>(kTemporalStride);
        feats(row, static_cast<Eigen::Index>(12 * s + c)) = mean;
        feats(row, static_cast<Eigen::Index>(12 * s + 6 + c)) = std::sqrt(var);
      }
    }
    if (!visible.empty()) {
      for (std::size_t c = 0; c < 6; ++c) {
        double sum = 0.0;
        for (auto s : visible) sum += feats(row, static_cast<Eigen::Index>(12 * s + c));
        feats(row, static_cast<Eigen::Index>(12 * S + c)) = sum / static_cast<double>(visible.size());
      }
    }
  }
  return feats * projection.matrix();
}

Latent reference_featurize(const GraphWindow& window, std::size_t latent_dim) {
  const FeatureProjection projection(featurize_width(window.segments), latent_dim, kFeaturizeSeed);
  return reference_featurize(window, projection);
}

}  // namespace geomimu
