#include "compois/diagnostics.hpp"

#include <cmath>
#include <string>

#include "compois/error.hpp"

namespace compois {

namespace {

constexpr double kRidge = 1e-10;

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& draws) {
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd centered = draws.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(draws.rows() - 1);
}

// log det via Cholesky; false if not positive definite.
bool log_det(const Eigen::MatrixXd& m, double& out) {
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  out = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0)) return false;
    out += 2.0 * std::log(diag[i]);
  }
  return std::isfinite(out);
}

void check_shape(const Eigen::MatrixXd& draws) {
  const auto n = draws.rows();
  if (draws.cols() < 1 || n < 4) throw SingularCovariance("too few draws for a covariance estimate");
}

}  // namespace

Eigen::MatrixXd batch_means_covariance(const Eigen::MatrixXd& draws) {
  check_shape(draws);
  const auto n = draws.rows();
  const auto b = static_cast<Eigen::Index>(std::floor(std::sqrt(static_cast<double>(n))));
  const Eigen::Index a = n / b;
  const Eigen::RowVectorXd grand =
      draws.topRows(a * b).colwise().mean();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(draws.cols(), draws.cols());
  for (Eigen::Index k = 0; k < a; ++k) {
    const Eigen::RowVectorXd d = draws.middleRows(k * b, b).colwise().mean() - grand;
    sigma.noalias() += d.transpose() * d;
  }
  return sigma * (static_cast<double>(b) / static_cast<double>(a - 1));
}

MessResult mess(const Eigen::MatrixXd& draws) {
  check_shape(draws);
  const auto p = draws.cols();
  if (draws.rows() < 2 * p * p) {
    throw SingularCovariance("mESS needs at least 2 p^2 draws, got " + std::to_string(draws.rows()));
  }
  Eigen::MatrixXd lambda = sample_covariance(draws);
  if (!(lambda.diagonal().minCoeff() > 0.0)) {
    throw SingularCovariance("a chain coordinate is constant over the retained draws");
  }
  Eigen::MatrixXd sigma = batch_means_covariance(draws);
  double ld_lambda = 0.0;
  double ld_sigma = 0.0;
  bool regularized = false;
  if (!log_det(lambda, ld_lambda) || !log_det(sigma, ld_sigma)) {
    regularized = true;
    lambda += kRidge * Eigen::MatrixXd::Identity(p, p);
    sigma += kRidge * Eigen::MatrixXd::Identity(p, p);
    if (!log_det(lambda, ld_lambda) || !log_det(sigma, ld_sigma)) {
      throw SingularCovariance("chain covariance is singular even after ridge regularisation");
    }
  }
  const double value =
      static_cast<double>(draws.rows()) * std::exp((ld_lambda - ld_sigma) / static_cast<double>(p));
  return {value, regularized};
}

std::vector<double> ess_per_column(const Eigen::MatrixXd& draws) {
  const Eigen::MatrixXd lambda = sample_covariance(draws);
  const Eigen::MatrixXd sigma = batch_means_covariance(draws);
  std::vector<double> out;
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    out.push_back(static_cast<double>(draws.rows()) * lambda(j, j) / sigma(j, j));
  }
  return out;
}

std::vector<double> mcse_per_column(const Eigen::MatrixXd& draws) {
  const Eigen::MatrixXd sigma = batch_means_covariance(draws);
  std::vector<double> out;
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    out.push_back(std::sqrt(sigma(j, j) / static_cast<double>(draws.rows())));
  }
  return out;
}

}  // namespace compois
