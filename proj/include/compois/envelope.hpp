#pragma once

// Single-component rejection envelopes for COM-Poisson(mu, nu):
//   nu >= 1: Poisson(mu) proposal,   B = (mu^m / m!)^(nu - 1), m = floor(mu)
//   nu <  1: Geometric(p) proposal,  B = sup_y q_f(y) / (p (1-p)^y)
// Both bounds are the exact suprema of q_f / q_g, not loose upper bounds.

#include <optional>

#include "compois/cmp.hpp"

namespace compois {

enum class EnvelopeKind { Poisson, Geometric };

struct Envelope {
  EnvelopeKind kind;
  double gamma;      ///< mu for Poisson, p for geometric
  double log_zg;     ///< log normaliser of q_g: mu (Poisson), 0 (geometric)
  double log_b;      ///< log sup_y q_f(y) / q_g(y)
  double log_gamma;  ///< log(gamma)
  double log1m_p;    ///< log(1 - p); geometric only, 0 otherwise
  Count sup_at;      ///< location of the supremum
};

/// Moment-matched geometric parameter p = 2 nu / (2 mu nu + 1 + nu), so that
/// (1-p)/p equals the approximate COM-Poisson mean.
double choose_p(const CmpParams& params) noexcept;

/// Envelope for `params`. `p_override` replaces the moment-matched p for the
/// geometric branch (any p in (0,1) gives a valid sampler) and is ignored
/// when nu >= 1.
Envelope build_envelope(const CmpParams& params, std::optional<double> p_override = {});

/// log q_g(y): log p + y log(1-p) for geometric; y log mu - log y! for Poisson
/// (unnormalised, its Z_g is e^mu).
double envelope_log_density(const Envelope& env, Count y) noexcept;

struct BoundSearch {
  double log_b;
  Count argmax;
};

/// max_{0 <= y <= ymax} log q_f(y) - log q_g(y), by enumeration.
BoundSearch brute_force_bound(const CmpParams& params, const Envelope& env, Count ymax);

/// M_{f/g} = (Z_g / Z_f) B_{f/g}, with Z_f from the converged truncated sum.
struct BoundDecomposition {
  double log_b;
  double log_m;
  double log_zg;
  double log_zf;
};

BoundDecomposition decompose_bound(const CmpParams& params, const Envelope& env);

}  // namespace compois
