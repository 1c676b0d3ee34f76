#pragma once

// Synthetic regression data drawn with the library's exact sampler.

#include <cmath>
#include <cstdint>
#include <vector>

#include "compois/envelope.hpp"
#include "compois/glm.hpp"
#include "compois/rejection.hpp"
#include "compois/rng.hpp"

namespace synthetic {

/// Columns Y and X with X ~ N(0, 1); log mu = b0 + b1 X, log nu = rho0.
inline compois::Dataset cmp_regression(std::size_t n, double b0, double b1, double rho0,
                                       std::uint64_t seed) {
  compois::RngStream rng(seed);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    const compois::CmpParams p = compois::CmpParams::from_log(b0 + b1 * x[i], rho0);
    y[i] = static_cast<double>(compois::sample_one(p, compois::build_envelope(p), rng).value);
  }
  return compois::Dataset({"Y", "X"}, {y, x});
}

inline compois::ModelSpec cmp_regression_spec() {
  return compois::parse_formula("mu ~ X ; nu ~ 1 ; response = Y", "synthetic");
}

inline compois::ModelSpec poisson_regression_spec() {
  return compois::parse_formula("mu ~ X ; response = Y", "synthetic-poisson");
}

}  // namespace synthetic
