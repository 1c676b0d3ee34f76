#include "compois/rejection.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "compois/error.hpp"
#include "compois/kernels.hpp"

namespace compois {

namespace {

constexpr double kInversionLimit = 10.0;

Count poisson_inversion(double mu, RngStream& rng) noexcept {
  const double p0 = std::exp(-mu);
  while (true) {
    const double u = rng.uniform();
    Count y = 0;
    double p = p0;
    double cdf = p0;
    while (u > cdf && p > 0.0) {
      ++y;
      p *= mu / static_cast<double>(y);
      cdf += p;
    }
    // p underflowed before reaching u: only possible for u within rounding
    // of 1, so redraw.
    if (u <= cdf) return y;
  }
}

// Hormann (1993), transformed rejection with squeeze; exact for mu >= 10.
Count poisson_ptrs(double mu, double log_mu, RngStream& rng) noexcept {
  const double slam = std::sqrt(mu);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double log_inv_alpha = std::log(1.1239 + 1.1328 / (b - 3.4));
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    if (us <= 0.0) continue;
    const double kd = std::floor((2.0 * a / us + b) * u + mu + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<Count>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    const Count k = static_cast<Count>(kd);
    if (std::log(v) + log_inv_alpha - std::log(a / (us * us) + b) <=
        -mu + kd * log_mu - log_factorial(k)) {
      return k;
    }
  }
}

[[noreturn]] void throw_runaway(const CmpParams& params) {
  throw RunawayRejection("rejection sampler exceeded 1e9 trials at mu=" +
                         std::to_string(params.mu()) + ", nu=" + std::to_string(params.nu()));
}

}  // namespace

Count draw_poisson(double mu, double log_mu, RngStream& rng) noexcept {
  return mu < kInversionLimit ? poisson_inversion(mu, rng) : poisson_ptrs(mu, log_mu, rng);
}

Count draw_geometric(double log1m_p, RngStream& rng) noexcept {
  return static_cast<Count>(std::floor(std::log(rng.uniform_pos()) / log1m_p));
}

Count draw_from_envelope(const Envelope& env, RngStream& rng) noexcept {
  if (env.kind == EnvelopeKind::Geometric) return draw_geometric(env.log1m_p, rng);
  return draw_poisson(env.gamma, env.log_gamma, rng);
}

double log_acceptance(const CmpParams& params, const Envelope& env, Count y) noexcept {
  const double yd = static_cast<double>(y);
  const double lf = log_factorial(y);
  if (env.kind == EnvelopeKind::Poisson) {
    return (params.nu() - 1.0) * (yd * params.log_mu() - lf) - env.log_b;
  }
  return params.nu() * (yd * params.log_mu() - lf) - env.log_b - env.log_gamma -
         yd * env.log1m_p;
}

DrawWithCost sample_one(const CmpParams& params, const Envelope& env, RngStream& rng) {
  std::uint64_t trials = 0;
  while (true) {
    const Count y = draw_from_envelope(env, rng);
    if (++trials > kMaxTrialsPerDraw) throw_runaway(params);
    if (std::log(rng.uniform_pos()) <= log_acceptance(params, env, y)) return {y, trials};
  }
}

BatchDraws sample_r(const CmpParams& params, const Envelope& env, std::uint64_t r,
                    RngStream& rng) {
  if (r == 0) throw InvalidParameter("sample_r: r must be >= 1");
  BatchDraws batch{{}, 0};
  batch.values.reserve(r);
  for (std::uint64_t i = 0; i < r; ++i) {
    const DrawWithCost d = sample_one(params, env, rng);
    batch.values.push_back(d.value);
    batch.total_trials += d.trials;
  }
  return batch;
}

std::uint64_t count_trials(const CmpParams& params, const Envelope& env, std::uint64_t r,
                           RngStream& rng) {
  if (r == 0) throw InvalidParameter("count_trials: r must be >= 1");
  if (params.nu() == 1.0) return r;
  std::uint64_t total = 0;
  for (std::uint64_t i = 0; i < r; ++i) {
    std::uint64_t trials = 0;
    while (true) {
      const Count y = draw_from_envelope(env, rng);
      if (++trials > kMaxTrialsPerDraw) throw_runaway(params);
      if (std::log(rng.uniform_pos()) <= log_acceptance(params, env, y)) break;
    }
    total += trials;
  }
  return total;
}

std::vector<AcceptanceCell> acceptance_grid(std::span<const double> mu_grid,
                                            std::span<const double> nu_grid,
                                            std::uint64_t draws_per_cell, std::uint64_t seed,
                                            ExecPolicy exec) {
  if (mu_grid.empty() || nu_grid.empty()) {
    throw InvalidParameter("acceptance_grid: grids must be non-empty");
  }
  if (draws_per_cell < 10'000) {
    throw InvalidParameter("acceptance_grid: draws_per_cell must be >= 10000");
  }
  std::vector<AcceptanceCell> cells;
  cells.reserve(mu_grid.size() * nu_grid.size());
  for (double mu : mu_grid) {
    for (double nu : nu_grid) {
      (void)CmpParams(mu, nu);  // validate up front, outside the parallel region
      cells.push_back({mu, nu, 0, 0});
    }
  }
  kernels::acceptance_cells(cells, draws_per_cell, seed, exec);
  return cells;
}

void write_acceptance_csv(std::ostream& out, std::span<const AcceptanceCell> cells) {
  out << "mu,nu,proposals,accepts,rate\n";
  const auto old_precision = out.precision(17);
  for (const auto& c : cells) {
    out << c.mu << ',' << c.nu << ',' << c.proposals << ',' << c.accepts << ',' << c.rate()
        << '\n';
  }
  out.precision(old_precision);
}

}  // namespace compois
