#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "compois/diagnostics.hpp"
#include "compois/error.hpp"
#include "compois/rng.hpp"

using namespace compois;

namespace {

Eigen::MatrixXd iid_normal(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

Eigen::MatrixXd ar1(Eigen::Index n, double phi, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::MatrixXd x(n, 1);
  double v = rng.normal() / std::sqrt(1 - phi * phi);
  for (Eigen::Index i = 0; i < n; ++i) {
    v = phi * v + rng.normal();
    x(i, 0) = v;
  }
  return x;
}

}  // namespace

TEST(Mess, IndependentDrawsNearSampleSize) {
  std::vector<double> values;
  for (std::uint64_t seed = 1; seed <= 101; ++seed) {
    const auto r = mess(iid_normal(10'000, 3, seed));
    EXPECT_FALSE(r.regularized);
    values.push_back(r.value);
  }
  std::sort(values.begin(), values.end());
  EXPECT_NEAR(values[50], 10'000, 1'000);
  EXPECT_GT(values.front(), 7'000);
  EXPECT_LT(values.back(), 13'000);
}

TEST(Mess, Ar1MatchesAsymptoticValue) {
  const double phi = 0.9;
  const Eigen::Index n = 1'000'000;
  const double expected = static_cast<double>(n) * (1 - phi) / (1 + phi);
  const auto r = mess(ar1(n, phi, 2));
  EXPECT_NEAR(r.value, expected, 0.2 * expected);
  const auto ess = ess_per_column(ar1(n, phi, 2));
  EXPECT_NEAR(ess[0], expected, 0.2 * expected);
}

TEST(Mess, SingularAndShortInputs) {
  Eigen::MatrixXd x = iid_normal(5'000, 2, 3);
  x.col(1) = 2.0 * x.col(0);
  const auto r = mess(x);
  EXPECT_TRUE(r.regularized);
  EXPECT_THROW(mess(iid_normal(7, 2, 4)), SingularCovariance);
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(1'000, 2, 1.0);
  EXPECT_THROW(mess(flat), SingularCovariance);
}

TEST(BatchMeans, CovarianceOfIndependentColumns) {
  const auto s = batch_means_covariance(iid_normal(40'000, 2, 5));
  EXPECT_NEAR(s(0, 0), 1.0, 0.2);
  EXPECT_NEAR(s(1, 1), 1.0, 0.2);
  EXPECT_NEAR(s(0, 1), 0.0, 0.2);
}

TEST(Mcse, ScalesWithEss) {
  const auto x = iid_normal(10'000, 1, 6);
  const auto se = mcse_per_column(x);
  EXPECT_NEAR(se[0], 0.01, 0.002);
}
