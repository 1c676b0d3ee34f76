#include "compois/estimator.hpp"

#include <cmath>
#include <numeric>

#include "compois/error.hpp"
#include "compois/kernels.hpp"
#include "compois/rejection.hpp"

namespace compois {

MhatWithDraws estimate_m(const CmpParams& params, const Envelope& env, std::uint64_t r,
                         RngStream& rng) {
  BatchDraws batch = sample_r(params, env, r, rng);
  return {{r, batch.total_trials}, std::move(batch.values)};
}

double log_reciprocal_z_estimate(const MhatEstimate& mhat, const Envelope& env) noexcept {
  return std::log(mhat.value()) - env.log_zg - env.log_b;
}

LikelihoodEstimate unbiased_loglik(std::span<const Count> y, std::span<const CmpParams> params,
                                   std::uint64_t r, RngStream& rng, ExecPolicy exec) {
  if (y.size() != params.size()) throw InvalidParameter("unbiased_loglik: length mismatch");
  if (r == 0) throw InvalidParameter("unbiased_loglik: r must be >= 1");
  LikelihoodEstimate est{0.0, r, std::vector<double>(y.size())};
  kernels::loglik_terms(y, params, r, rng.next(), est.per_obs_log, exec);
  est.log_value = std::accumulate(est.per_obs_log.begin(), est.per_obs_log.end(), 0.0);
  return est;
}

double bic(std::size_t k, std::size_t n, double loglik) noexcept {
  return static_cast<double>(k) * std::log(static_cast<double>(n)) - 2.0 * loglik;
}

}  // namespace compois
