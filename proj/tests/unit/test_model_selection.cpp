#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "compois/estimator.hpp"
#include "compois/mcmc.hpp"
#include "compois/model_selection.hpp"
#include "synthetic.hpp"

using namespace compois;

TEST(ArgmaxTruncatedLoglik, PicksBestRow) {
  const Dataset data = synthetic::cmp_regression(40, 0.8, 0.3, 0.0, 3);
  const Design design(synthetic::cmp_regression_spec(), data);
  Eigen::MatrixXd draws(3, 3);
  draws << -3.0, 0.0, 0.0,  //
      0.8, 0.3, 0.0,        //
      3.0, 1.0, 1.0;
  EXPECT_EQ(argmax_truncated_loglik(design, draws), 1u);
  EXPECT_EQ(argmax_truncated_loglik(design, draws, ExecPolicy{2}), 1u);
}

TEST(BicEstimate, PoissonModelIsExact) {
  const Dataset data = synthetic::cmp_regression(60, 0.8, 0.3, 0.0, 3);
  const Design design(synthetic::poisson_regression_spec(), data);
  McmcConfig c;
  c.iterations = 3000;
  c.burn_in = 500;
  const auto chain = run_chain(design, c);
  const auto b = bic_estimate(design, chain.draws, 10, 1);
  EXPECT_EQ(b.k, 2u);
  EXPECT_EQ(b.n, 60u);
  EXPECT_NEAR(b.loglik_hat, b.truncated_loglik, 1e-9);
  EXPECT_NEAR(b.bic_hat, bic(2, 60, b.truncated_loglik), 1e-9);
  const auto params = design.params(b.theta_hat);
  EXPECT_NEAR(truncated_loglik(design.y(), params), b.truncated_loglik, 1e-12);
}

TEST(BicEstimate, CmpEstimateNearTruncatedValue) {
  const Dataset data = synthetic::cmp_regression(60, 1.0, 0.3, std::log(0.5), 3);
  const Design design(synthetic::cmp_regression_spec(), data);
  McmcConfig c;
  c.iterations = 3000;
  c.burn_in = 500;
  const auto chain = run_chain(design, c);
  const auto b = bic_estimate(design, chain.draws, 5000, 2);
  EXPECT_NEAR(b.loglik_hat, b.truncated_loglik, 0.5);
  const auto again = bic_estimate(design, chain.draws, 5000, 2, ExecPolicy{2});
  EXPECT_EQ(b.loglik_hat, again.loglik_hat);
}

TEST(RankModels, StableAscendingAndCsv) {
  std::vector<BicEstimate> rows(3);
  rows[0].model = "a";
  rows[0].bic_hat = 10;
  rows[1].model = "b";
  rows[1].bic_hat = 5;
  rows[2].model = "c";
  rows[2].bic_hat = 10;
  rank_models(rows);
  EXPECT_EQ(rows[0].rank, 2);
  EXPECT_EQ(rows[1].rank, 1);
  EXPECT_EQ(rows[2].rank, 3);
  std::ostringstream out;
  write_bic_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "model,k,n,r,loglik_hat,bic_hat,rank");
}
