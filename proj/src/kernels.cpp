#include "compois/kernels.hpp"

#include <cmath>
#include <exception>
#include <mutex>

#include "compois/envelope.hpp"
#include "compois/error.hpp"
#include "compois/rejection.hpp"
#include "compois/rng.hpp"

namespace compois::kernels {

namespace {

// Exceptions must not escape an OpenMP region; the first one is kept and
// rethrown after the loop.
class ExceptionSlot {
 public:
  template <class Fn>
  void run(Fn&& fn) noexcept {
    try {
      fn();
    } catch (...) {
      std::scoped_lock lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

inline Count auxiliary_draw(const CmpParams& params, std::uint64_t key, std::size_t i) {
  RngStream rng = RngStream::derive(key, i);
  return sample_one(params, build_envelope(params), rng).value;
}

inline double loglik_term(Count y, const CmpParams& params, std::uint64_t r, std::uint64_t key,
                          std::size_t i) {
  RngStream rng = RngStream::derive(key, i);
  const Envelope env = build_envelope(params);
  const std::uint64_t n_r = count_trials(params, env, r, rng);
  const double log_mhat = std::log(static_cast<double>(n_r) / static_cast<double>(r));
  return log_unnormalized_mass(params, y) - env.log_zg + log_mhat - env.log_b;
}

inline void acceptance_cell(AcceptanceCell& cell, std::uint64_t draws, std::uint64_t seed,
                            std::size_t i) {
  const CmpParams params(cell.mu, cell.nu);
  RngStream rng = RngStream::derive(seed, i);
  const Envelope env = build_envelope(params);
  std::uint64_t proposals = 0;
  for (std::uint64_t d = 0; d < draws; ++d) proposals += sample_one(params, env, rng).trials;
  cell.proposals = proposals;
  cell.accepts = draws;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidParameter("kernel input/output length mismatch");
}

}  // namespace

void draw_auxiliary_serial(std::span<const CmpParams> params, std::uint64_t key,
                           std::span<Count> out) {
  check_sizes(params.size(), out.size());
  for (std::size_t i = 0; i < params.size(); ++i) out[i] = auxiliary_draw(params[i], key, i);
}

void draw_auxiliary_omp(std::span<const CmpParams> params, std::uint64_t key,
                        std::span<Count> out, int threads) {
  check_sizes(params.size(), out.size());
  ExceptionSlot slot;
  const auto n = static_cast<std::ptrdiff_t>(params.size());
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    slot.run([&] { out[i] = auxiliary_draw(params[i], key, static_cast<std::size_t>(i)); });
  }
  slot.rethrow();
}

void draw_auxiliary(std::span<const CmpParams> params, std::uint64_t key, std::span<Count> out,
                    ExecPolicy exec) {
  if (exec.threads > 1) {
    draw_auxiliary_omp(params, key, out, exec.threads);
  } else {
    draw_auxiliary_serial(params, key, out);
  }
}

void loglik_terms_serial(std::span<const Count> y, std::span<const CmpParams> params,
                         std::uint64_t r, std::uint64_t key, std::span<double> out) {
  check_sizes(y.size(), params.size());
  check_sizes(y.size(), out.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = loglik_term(y[i], params[i], r, key, i);
}

void loglik_terms_omp(std::span<const Count> y, std::span<const CmpParams> params,
                      std::uint64_t r, std::uint64_t key, std::span<double> out, int threads) {
  check_sizes(y.size(), params.size());
  check_sizes(y.size(), out.size());
  ExceptionSlot slot;
  const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    slot.run([&] {
      out[i] = loglik_term(y[i], params[i], r, key, static_cast<std::size_t>(i));
    });
  }
  slot.rethrow();
}

void loglik_terms(std::span<const Count> y, std::span<const CmpParams> params, std::uint64_t r,
                  std::uint64_t key, std::span<double> out, ExecPolicy exec) {
  if (exec.threads > 1) {
    loglik_terms_omp(y, params, r, key, out, exec.threads);
  } else {
    loglik_terms_serial(y, params, r, key, out);
  }
}

void acceptance_cells_serial(std::span<AcceptanceCell> cells, std::uint64_t draws_per_cell,
                             std::uint64_t seed) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    acceptance_cell(cells[i], draws_per_cell, seed, i);
  }
}

void acceptance_cells_omp(std::span<AcceptanceCell> cells, std::uint64_t draws_per_cell,
                          std::uint64_t seed, int threads) {
  ExceptionSlot slot;
  const auto n = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    slot.run([&] {
      acceptance_cell(cells[i], draws_per_cell, seed, static_cast<std::size_t>(i));
    });
  }
  slot.rethrow();
}

void acceptance_cells(std::span<AcceptanceCell> cells, std::uint64_t draws_per_cell,
                      std::uint64_t seed, ExecPolicy exec) {
  if (exec.threads > 1) {
    acceptance_cells_omp(cells, draws_per_cell, seed, exec.threads);
  } else {
    acceptance_cells_serial(cells, draws_per_cell, seed);
  }
}

void map_index_serial(const IndexFn& fn, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(i);
}

void map_index_omp(const IndexFn& fn, std::span<double> out, int threads) {
  ExceptionSlot slot;
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    slot.run([&] { out[i] = fn(static_cast<std::size_t>(i)); });
  }
  slot.rethrow();
}

void map_index(const IndexFn& fn, std::span<double> out, ExecPolicy exec) {
  if (exec.threads > 1) {
    map_index_omp(fn, out, exec.threads);
  } else {
    map_index_serial(fn, out);
  }
}

}  // namespace compois::kernels
