#pragma once

// Single-site random-walk samplers for the dual-link regression posterior.
//
//   Exchange          auxiliary data y' ~ f(. | theta') cancels Z_f exactly
//   Gimh              pseudo-marginal, current-state estimate cached
//   Mcwm              pseudo-marginal, current-state estimate refreshed
//   ExactTruncatedMh  plain MH with converged truncated Z_f (reference)

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compois/cmp.hpp"
#include "compois/diagnostics.hpp"
#include "compois/glm.hpp"
#include "compois/parallel.hpp"
#include "compois/rng.hpp"

namespace compois {

enum class Algorithm { Exchange, Gimh, Mcwm, ExactTruncatedMh };

/// "exchange", "gimh", "mcwm", "exact-truncated". Throws InvalidParameter.
Algorithm parse_algorithm(std::string_view text);
std::string_view to_string(Algorithm algorithm) noexcept;

/// Fills out[i] with a draw from params[i] using substreams of `key`.
using AuxiliarySampler =
    std::function<void(std::span<const CmpParams>, std::uint64_t key, std::span<Count>)>;

struct McmcConfig {
  Algorithm algorithm = Algorithm::Exchange;
  std::uint64_t iterations = 100'000;  ///< total sweeps, burn-in included
  std::uint64_t burn_in = 10'000;
  double target_accept = 0.44;
  std::uint64_t seed = 1;
  std::uint64_t r = 100;              ///< acceptances per estimate (pseudo-marginal)
  std::vector<double> initial_steps;  ///< empty: 0.1 on each coefficient
  std::vector<double> initial;        ///< empty: default_start
  std::uint64_t adapt_batch = 50;
  bool adapt = true;  ///< false: burn-in only discards, steps stay at initial_steps
  ExecPolicy exec;
  AuxiliarySampler auxiliary;  ///< empty: the exact rejection sampler

  /// Throws InvalidParameter on inconsistent settings.
  void validate(std::size_t k) const;
};

/// Log-linear: mu intercept log(mean(y) + 0.5), everything else 0.
/// Direct: mu = mean(y) + 0.5, nu = 1.
std::vector<double> default_start(const Design& design);

struct ChainState {
  std::vector<double> beta;
  std::vector<double> eta_mu;
  std::vector<double> eta_nu;
  std::vector<CmpParams> params;
  double log_prior = 0.0;
  double log_lik = 0.0;  ///< cached (estimated) log-likelihood; unused by Exchange
};

/// sum_i [log q(y_i|theta'_i) - log q(y_i|theta_i)] +
///       [log q(y'_i|theta_i) - log q(y'_i|theta'_i)]
double exchange_log_ratio(std::span<const Count> y, std::span<const CmpParams> current,
                          std::span<const CmpParams> proposed, std::span<const Count> aux);

/// log step_j += (rate_j - target) / sqrt(batch_index), batch_index >= 1.
void adapt_steps(std::span<const double> rates, double target, std::uint64_t batch_index,
                 std::span<double> steps);

/// One Metropolis-within-Gibbs transition kernel bound to a design.
class ChainKernel {
 public:
  ChainKernel(const Design& design, const McmcConfig& config);

  /// Throws DivergentLink or InvalidParameter for an unusable start.
  ChainState initial_state(std::span<const double> beta, RngStream& rng) const;

  /// Random-walk update of coefficient j; true if accepted.
  bool update(std::size_t j, double step, ChainState& state, RngStream& rng);

  /// One systematic scan over all coefficients.
  void sweep(std::span<const double> steps, ChainState& state, RngStream& rng,
             std::span<bool> accepted);

  std::uint64_t divergent_proposals() const noexcept { return divergent_; }
  std::uint64_t nonfinite_ratios() const noexcept { return nonfinite_; }

 private:
  double log_lik(std::span<const CmpParams> params, std::uint64_t key) const;

  const Design& design_;
  McmcConfig config_;
  std::vector<double> eta_scratch_;
  std::vector<CmpParams> params_scratch_;
  std::vector<Count> aux_;
  mutable std::vector<double> terms_;
  std::vector<double> beta_scratch_;
  std::uint64_t divergent_ = 0;
  std::uint64_t nonfinite_ = 0;
};

struct CoefficientSummary {
  std::string name;
  double mean;
  double sd;
  double mcse;
  double accept_rate;  ///< post burn-in
  double step;         ///< frozen step size
};

struct ChainResult {
  McmcConfig config;
  std::string model;
  std::string formula;
  std::size_t n = 0;
  std::vector<std::string> names;
  Eigen::MatrixXd draws;  ///< retained iterations x k
  std::vector<std::uint64_t> accept_counts;
  std::uint64_t retained = 0;
  std::vector<std::vector<double>> tuning;  ///< step vector after each adaptation batch
  std::vector<CoefficientSummary> summaries;
  std::optional<MessResult> mess;
  std::uint64_t divergent_proposals = 0;
  std::uint64_t nonfinite_ratios = 0;
  double cpu_seconds = 0.0;
  double wall_seconds = 0.0;
  double draws_per_second = 0.0;  ///< sweeps per wall-clock second
};

ChainResult run_chain(const Design& design, const McmcConfig& config);

/// Independent chains, one per config, run concurrently over `exec.threads`.
/// Each chain's own kernels run serially.
std::vector<ChainResult> run_chains(const Design& design, std::span<const McmcConfig> configs,
                                    ExecPolicy exec);

/// Header of coefficient names, one row per retained iteration.
void write_chain_csv(std::ostream& out, const ChainResult& result);

/// Versioned (`schema: 1`) JSON summary. Timing fields live under "timing".
void write_summary_json(std::ostream& out, const ChainResult& result);

}  // namespace compois
