#include "geomimu/kernels.hpp"

#include <exception>

#include <omp.h>

namespace geomimu::kernels {

namespace {

void check_shape(const Latent& latent, const Codebooks& books, QuantizeResult& out) {
  if (static_cast<std::size_t>(latent.cols()) != books.width())
    throw ValidationError("latent width " + std::to_string(latent.cols()) + " does not match codebooks (" +
                          std::to_string(books.width()) + ")");
  out.indices.resize(latent.rows(), static_cast<Eigen::Index>(books.P));
  out.quantized.resize(latent.rows(), latent.cols());
}

// Direct squared distance; strict comparison keeps the lowest index on ties.
void quantize_row(const Latent& latent, Eigen::Index l, const Codebooks& books, QuantizeResult& out) {
  const auto dim = static_cast<Eigen::Index>(books.dim);
  for (std::size_t j = 0; j < books.P; ++j) {
    const Eigen::MatrixXd& codes = books.codes[j];
    const Eigen::Index off = static_cast<Eigen::Index>(j) * dim;
    Eigen::Index best = 0;
    double best_d = 0.0;
    for (Eigen::Index k = 0; k < codes.rows(); ++k) {
      double d = 0.0;
      for (Eigen::Index c = 0; c < dim; ++c) {
        const double e = latent(l, off + c) - codes(k, c);
        d += e * e;
      }
      if (k == 0 || d < best_d) {
        best = k;
        best_d = d;
      }
    }
    out.indices(l, static_cast<Eigen::Index>(j)) = static_cast<std::uint32_t>(best);
    out.quantized.row(l).segment(off, dim) = codes.row(best);
  }
}

}  // namespace

void nearest_codes_serial(const Latent& latent, const Codebooks& books, QuantizeResult& out) {
  check_shape(latent, books, out);
  for (Eigen::Index l = 0; l < latent.rows(); ++l) quantize_row(latent, l, books, out);
}

void nearest_codes_parallel(const Latent& latent, const Codebooks& books, QuantizeResult& out) {
  check_shape(latent, books, out);
#pragma omp parallel for schedule(static)
  for (Eigen::Index l = 0; l < latent.rows(); ++l) quantize_row(latent, l, books, out);
}

std::vector<ImuWindow> simulate_batch_serial(const MotionSequence& motion,
                                             std::span<const SimulationJob> jobs, const Vec3& gravity) {
  std::vector<ImuWindow> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs)
    out.push_back(simulate_window(motion, *job.candidate, job.mount, job.prior, gravity, job.seed));
  return out;
}

std::vector<ImuWindow> simulate_batch_parallel(const MotionSequence& motion,
                                               std::span<const SimulationJob> jobs, const Vec3& gravity) {
  std::vector<ImuWindow> out(jobs.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(jobs.size()); ++i) {
    try {
      const auto& job = jobs[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] =
          simulate_window(motion, *job.candidate, job.mount, job.prior, gravity, job.seed);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

void set_thread_count(std::size_t threads) {
  if (threads > 0) omp_set_num_threads(static_cast<int>(threads));
}

std::size_t thread_count() { return static_cast<std::size_t>(omp_get_max_threads()); }

}  // namespace geomimu::kernels
