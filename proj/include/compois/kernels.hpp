#pragma once

// Data-parallel kernels. Each kernel has a serial reference version and an
// OpenMP version. Work item i always draws from RngStream::derive(key, i)
// and writes only out[i], so the two versions are bit-identical for any
// thread count; the dispatchers pick one from ExecPolicy.

#include <cstdint>
#include <functional>
#include <span>

#include "compois/cmp.hpp"
#include "compois/parallel.hpp"

namespace compois {
struct AcceptanceCell;
}

namespace compois::kernels {

/// out[i] ~ COM-Poisson(params[i]) (exchange auxiliary data).
void draw_auxiliary_serial(std::span<const CmpParams> params, std::uint64_t key,
                           std::span<Count> out);
void draw_auxiliary_omp(std::span<const CmpParams> params, std::uint64_t key,
                        std::span<Count> out, int threads);
void draw_auxiliary(std::span<const CmpParams> params, std::uint64_t key, std::span<Count> out,
                    ExecPolicy exec);

/// out[i] = log q_f(y_i) - log Z_g,i + log Mhat_i - log B_i with Mhat_i from
/// r acceptances: the log of the unbiased per-observation likelihood.
void loglik_terms_serial(std::span<const Count> y, std::span<const CmpParams> params,
                         std::uint64_t r, std::uint64_t key, std::span<double> out);
void loglik_terms_omp(std::span<const Count> y, std::span<const CmpParams> params,
                      std::uint64_t r, std::uint64_t key, std::span<double> out, int threads);
void loglik_terms(std::span<const Count> y, std::span<const CmpParams> params, std::uint64_t r,
                  std::uint64_t key, std::span<double> out, ExecPolicy exec);

/// Fills proposals/accepts of each cell from draws_per_cell acceptances.
void acceptance_cells_serial(std::span<AcceptanceCell> cells, std::uint64_t draws_per_cell,
                             std::uint64_t seed);
void acceptance_cells_omp(std::span<AcceptanceCell> cells, std::uint64_t draws_per_cell,
                          std::uint64_t seed, int threads);
void acceptance_cells(std::span<AcceptanceCell> cells, std::uint64_t draws_per_cell,
                      std::uint64_t seed, ExecPolicy exec);

/// out[i] = fn(i). `fn` must be safe to call concurrently.
using IndexFn = std::function<double(std::size_t)>;
void map_index_serial(const IndexFn& fn, std::span<double> out);
void map_index_omp(const IndexFn& fn, std::span<double> out, int threads);
void map_index(const IndexFn& fn, std::span<double> out, ExecPolicy exec);

}  // namespace compois::kernels
