#include "compois/envelope.hpp"

#include <cmath>
#include <string>

#include "compois/error.hpp"

namespace compois {

double choose_p(const CmpParams& params) noexcept {
  const double mu = params.mu();
  const double nu = params.nu();
  return 2.0 * nu / (2.0 * mu * nu + 1.0 + nu);
}

Envelope build_envelope(const CmpParams& params, std::optional<double> p_override) {
  const double nu = params.nu();
  if (nu >= 1.0) {
    if (!(params.mu() <= 0x1.0p52)) {
      throw InvalidParameter("Poisson envelope mode out of range for mu=" +
                             std::to_string(params.mu()));
    }
    const Count m = mode(params);
    const double log_b =
        (nu - 1.0) * (static_cast<double>(m) * params.log_mu() - log_factorial(m));
    return {EnvelopeKind::Poisson, params.mu(), params.mu(), log_b, params.log_mu(), 0.0, m};
  }

  const double p = p_override.value_or(choose_p(params));
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidParameter("geometric envelope parameter must lie in (0,1), got " +
                           std::to_string(p));
  }
  const double log1m_p = std::log1p(-p);
  // Ratio q_f/q_g is log-concave in y and peaks at floor(mu / (1-p)^(1/nu)).
  const double peak = std::exp(params.log_mu() - log1m_p / nu);
  if (!std::isfinite(peak) || peak > 0x1.0p52) {
    throw InvalidParameter("geometric envelope supremum out of range for mu=" +
                           std::to_string(params.mu()) + ", nu=" + std::to_string(nu));
  }
  const Count ym = static_cast<Count>(std::floor(peak));
  const double y = static_cast<double>(ym);
  const double log_b =
      -std::log(p) + nu * y * params.log_mu() - y * log1m_p - nu * log_factorial(ym);
  return {EnvelopeKind::Geometric, p, 0.0, log_b, std::log(p), log1m_p, ym};
}

double envelope_log_density(const Envelope& env, Count y) noexcept {
  const double yd = static_cast<double>(y);
  if (env.kind == EnvelopeKind::Geometric) return env.log_gamma + yd * env.log1m_p;
  return yd * env.log_gamma - log_factorial(y);
}

BoundSearch brute_force_bound(const CmpParams& params, const Envelope& env, Count ymax) {
  BoundSearch best{log_unnormalized_mass(params, 0) - envelope_log_density(env, 0), 0};
  for (Count y = 1; y <= ymax; ++y) {
    const double v = log_unnormalized_mass(params, y) - envelope_log_density(env, y);
    if (v > best.log_b) best = {v, y};
  }
  return best;
}

BoundDecomposition decompose_bound(const CmpParams& params, const Envelope& env) {
  const double log_zf = adaptive_log_z(params).log_z;
  return {env.log_b, env.log_zg - log_zf + env.log_b, env.log_zg, log_zf};
}

}  // namespace compois
