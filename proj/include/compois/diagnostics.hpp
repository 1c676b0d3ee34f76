#pragma once

#include <Eigen/Dense>
#include <vector>

namespace compois {

/// Multivariate batch-means estimate of the asymptotic covariance of the
/// chain mean, batch size floor(sqrt(n)).
Eigen::MatrixXd batch_means_covariance(const Eigen::MatrixXd& draws);

struct MessResult {
  double value;
  bool regularized;  ///< a 1e-10 ridge was needed to make a determinant positive
};

/// mESS = n (det Lambda / det Sigma)^(1/p); Lambda the sample covariance,
/// Sigma the batch-means covariance. Rows are iterations.
/// Throws SingularCovariance if the ridge does not rescue the determinants.
MessResult mess(const Eigen::MatrixXd& draws);

/// Univariate batch-means ESS per column.
std::vector<double> ess_per_column(const Eigen::MatrixXd& draws);

/// Monte Carlo standard error of each column mean, sqrt(Sigma_jj / n).
std::vector<double> mcse_per_column(const Eigen::MatrixXd& draws);

}  // namespace compois
