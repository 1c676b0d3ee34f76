#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "compois/cmp.hpp"
#include "compois/envelope.hpp"
#include "compois/parallel.hpp"
#include "compois/rng.hpp"

namespace compois {

/// Trial budget per accepted draw; exceeding it means the bound is wrong.
inline constexpr std::uint64_t kMaxTrialsPerDraw = 1'000'000'000ULL;

struct DrawWithCost {
  Count value;
  std::uint64_t trials;  ///< envelope proposals consumed, >= 1
};

struct BatchDraws {
  std::vector<Count> values;
  std::uint64_t total_trials;  ///< n_r, >= values.size()
};

/// Exact Poisson variate: sequential-search inversion for mu < 10, the
/// PTRS transformed-rejection method above.
Count draw_poisson(double mu, double log_mu, RngStream& rng) noexcept;

/// Geometric(p) on {0,1,...} by inversion, floor(log u / log(1-p)).
Count draw_geometric(double log1m_p, RngStream& rng) noexcept;

Count draw_from_envelope(const Envelope& env, RngStream& rng) noexcept;

/// log alpha(y) = log q_f(y) - log B - log q_g(y); always <= 0.
double log_acceptance(const CmpParams& params, const Envelope& env, Count y) noexcept;

/// One exact COM-Poisson draw. Throws RunawayRejection past the trial budget.
DrawWithCost sample_one(const CmpParams& params, const Envelope& env, RngStream& rng);

/// r iid draws reusing one envelope; total_trials ~ NegBin with mean r M.
BatchDraws sample_r(const CmpParams& params, const Envelope& env, std::uint64_t r,
                    RngStream& rng);

/// Proposals needed for r acceptances; same stream consumption as sample_r
/// but without storing values. For nu == 1 exactly every proposal is
/// accepted, so this returns r without touching the stream.
std::uint64_t count_trials(const CmpParams& params, const Envelope& env, std::uint64_t r,
                           RngStream& rng);

struct AcceptanceCell {
  double mu;
  double nu;
  std::uint64_t proposals;
  std::uint64_t accepts;
  double rate() const noexcept {
    return static_cast<double>(accepts) / static_cast<double>(proposals);
  }
};

/// Empirical acceptance rate per (mu, nu) cell, row-major over mu then nu.
/// Each cell runs `draws_per_cell` (>= 10^4) acceptances on its own
/// substream derived from `seed` and the cell index.
std::vector<AcceptanceCell> acceptance_grid(std::span<const double> mu_grid,
                                            std::span<const double> nu_grid,
                                            std::uint64_t draws_per_cell, std::uint64_t seed,
                                            ExecPolicy exec = {});

/// CSV with header `mu,nu,proposals,accepts,rate`.
void write_acceptance_csv(std::ostream& out, std::span<const AcceptanceCell> cells);

}  // namespace compois
