#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "compois/glm.hpp"
#include "compois/parallel.hpp"

namespace compois {

struct BicEstimate {
  std::string model;
  std::size_t k = 0;
  std::size_t n = 0;
  std::uint64_t r = 0;
  double loglik_hat = 0.0;
  double bic_hat = 0.0;
  int rank = 0;  ///< 1 = lowest BIC; 0 until rank_models is called
  std::vector<double> theta_hat;
  double truncated_loglik = 0.0;  ///< baseline log-likelihood at theta_hat
};

/// Row of `draws` maximising the truncated-sum log-likelihood. Throws
/// InvalidParameter if `draws` is empty.
std::size_t argmax_truncated_loglik(const Design& design, const Eigen::MatrixXd& draws,
                                    ExecPolicy exec = {});

/// BIC-hat = k log n - 2 log f-hat^(r) at the argmax posterior draw, with the
/// unbiased estimator seeded from `seed`.
BicEstimate bic_estimate(const Design& design, const Eigen::MatrixXd& draws, std::uint64_t r,
                         std::uint64_t seed, ExecPolicy exec = {});

/// Assigns rank 1.. by increasing bic_hat (ties keep input order).
void rank_models(std::span<BicEstimate> rows);

/// CSV header `model,k,n,r,loglik_hat,bic_hat,rank`.
void write_bic_csv(std::ostream& out, std::span<const BicEstimate> rows);

}  // namespace compois
