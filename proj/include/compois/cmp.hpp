#pragma once

// COM-Poisson density arithmetic. Everything is carried in log space:
// q_f(y | mu, nu) = (mu^y / y!)^nu overflows long before the sampler cares.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace compois {

using Count = std::uint64_t;

/// Location/dispersion pair of a COM-Poisson distribution. mu > 0, nu > 0.
class CmpParams {
 public:
  CmpParams(double mu, double nu);

  /// Construct from log(mu), log(nu) as produced by a log link.
  static CmpParams from_log(double log_mu, double log_nu);
  /// Non-throwing variant; nullopt when either parameter is not finite and
  /// positive.
  static std::optional<CmpParams> try_from_log(double log_mu, double log_nu) noexcept;

  double mu() const noexcept { return mu_; }
  double nu() const noexcept { return nu_; }
  double log_mu() const noexcept { return log_mu_; }

  friend bool operator==(const CmpParams&, const CmpParams&) = default;

 private:
  CmpParams(double mu, double nu, double log_mu) noexcept
      : mu_(mu), nu_(nu), log_mu_(log_mu) {}

  double mu_;
  double nu_;
  double log_mu_;
};

/// log(y!). Table lookup below 4096, log-gamma above. Thread-safe.
double log_factorial(Count y) noexcept;

/// log q_f(y | mu, nu) = nu * (y log mu - log y!).
inline double log_unnormalized_mass(const CmpParams& params, Count y) noexcept {
  return params.nu() * (static_cast<double>(y) * params.log_mu() - log_factorial(y));
}

/// floor(mu); for integer mu this is the upper of the two modes.
Count mode(const CmpParams& params) noexcept;

struct Moments {
  double mean;
  double variance;
};

/// Asymptotic mean mu + 1/(2 nu) - 1/2 and variance mu/nu. Poor for small
/// mu or small nu.
Moments approx_moments(const CmpParams& params) noexcept;

struct TruncationWindow {
  Count k1;
  Count k2;
};

/// log sum_{y=k1}^{k2} q_f(y). The mode must lie strictly inside the window,
/// except that k1 = 0 is allowed when the mode is 0. Throws InvalidWindow.
double truncated_log_z(const CmpParams& params, TruncationWindow window);

struct ConvergedLogZ {
  double log_z;
  Count k2;  ///< last term included (k1 is always 0)
};

/// Truncated sum from 0, with k2 doubled from 2*mode + 20 until the added
/// block changes log Z by less than 1e-14. Throws NonConvergence past 1e7
/// terms.
ConvergedLogZ adaptive_log_z(const CmpParams& params);

/// Normalised pmf from the converged truncated sum. The result has at least
/// ymax + 1 entries and is extended until the mass beyond the last entry is
/// below 1e-12.
std::vector<double> oracle_pmf(const CmpParams& params, Count ymax = 0);

using WindowPolicy = std::function<TruncationWindow(const CmpParams&)>;

/// Baseline likelihood sum_i [log q_f(y_i | theta_i) - log Z_hat(theta_i)],
/// with Z_hat from adaptive_log_z or from an explicit window policy.
double truncated_loglik(std::span<const Count> y, std::span<const CmpParams> params);
double truncated_loglik(std::span<const Count> y, std::span<const CmpParams> params,
                        const WindowPolicy& policy);

}  // namespace compois
