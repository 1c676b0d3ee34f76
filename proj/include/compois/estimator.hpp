#pragma once

// Unbiased likelihood estimation from rejection-sampler trial counts.
//
// With r acceptances needing n_r proposals, Mhat = n_r / r is unbiased for
// M = (Z_g / Z_f) B, hence
//   1 / Z_f  ~  Mhat / (Z_g B)          (unbiased, positive)
//   f(y)     ~  q_f(y) Mhat / (Z_g B)
// and the product over observations with independent Mhat_i is unbiased for
// the complete likelihood.

#include <cstdint>
#include <span>
#include <vector>

#include "compois/cmp.hpp"
#include "compois/envelope.hpp"
#include "compois/parallel.hpp"
#include "compois/rng.hpp"

namespace compois {

struct MhatEstimate {
  std::uint64_t r;
  std::uint64_t n_r;
  double value() const noexcept { return static_cast<double>(n_r) / static_cast<double>(r); }
};

struct MhatWithDraws {
  MhatEstimate mhat;
  std::vector<Count> draws;
};

MhatWithDraws estimate_m(const CmpParams& params, const Envelope& env, std::uint64_t r,
                         RngStream& rng);

/// log Mhat - log Z_g - log B. Its exponential is unbiased for 1/Z_f; the log
/// itself is not.
double log_reciprocal_z_estimate(const MhatEstimate& mhat, const Envelope& env) noexcept;

struct LikelihoodEstimate {
  double log_value;
  std::uint64_t r;
  std::vector<double> per_obs_log;
};

/// Independent Mhat_i per observation, each on substream (key, i) with the
/// key taken from `rng`.
LikelihoodEstimate unbiased_loglik(std::span<const Count> y, std::span<const CmpParams> params,
                                   std::uint64_t r, RngStream& rng, ExecPolicy exec = {});

/// k log n - 2 loglik.
double bic(std::size_t k, std::size_t n, double loglik) noexcept;

}  // namespace compois
