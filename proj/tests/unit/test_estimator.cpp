#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "compois/envelope.hpp"
#include "compois/error.hpp"
#include "compois/estimator.hpp"

using namespace compois;

namespace {

struct MeanSe {
  double mean;
  double se;
  double sd;
};

MeanSe summarise(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));
  return {mean, sd / std::sqrt(n), sd};
}

std::vector<double> mhat_replicates(const CmpParams& p, std::uint64_t r, int reps,
                                    std::uint64_t seed) {
  const Envelope env = build_envelope(p);
  RngStream rng(seed);
  std::vector<double> out;
  for (int i = 0; i < reps; ++i) out.push_back(estimate_m(p, env, r, rng).mhat.value());
  return out;
}

}  // namespace

TEST(EstimateM, UnitDispersionIsExact) {
  const CmpParams p(4, 1);
  for (double v : mhat_replicates(p, 50, 20, 1)) EXPECT_EQ(v, 1.0);
}

TEST(EstimateM, UnbiasedForBound) {
  const auto s = summarise(mhat_replicates(CmpParams(2, 0.5), 1000, 200, 10));
  EXPECT_LT(std::fabs(s.mean - 1.6026842545492329761), 3 * s.se);
  for (double v : mhat_replicates(CmpParams(2, 0.5), 10, 50, 11)) EXPECT_GE(v, 1.0);
}

TEST(EstimateM, StandardDeviationShrinksLikeInverseRootR) {
  const CmpParams p(2, 0.5);
  const double sd10 = summarise(mhat_replicates(p, 10, 400, 12)).sd;
  const double sd1000 = summarise(mhat_replicates(p, 1000, 400, 13)).sd;
  const double ratio = sd10 / sd1000;
  EXPECT_GT(ratio, 10.0 / 1.5);
  EXPECT_LT(ratio, 10.0 * 1.5);
}

TEST(EstimateM, ReturnsTheDraws) {
  const CmpParams p(2, 0.5);
  RngStream rng(3);
  const auto m = estimate_m(p, build_envelope(p), 25, rng);
  EXPECT_EQ(m.draws.size(), 25u);
  EXPECT_EQ(m.mhat.r, 25u);
  EXPECT_GE(m.mhat.n_r, 25u);
}

TEST(LogReciprocalZ, UnitDispersionExact) {
  const CmpParams p(3, 1);
  const Envelope env = build_envelope(p);
  RngStream rng(1);
  const auto m = estimate_m(p, env, 10, rng).mhat;
  EXPECT_EQ(log_reciprocal_z_estimate(m, env), -3.0);
}

TEST(LogReciprocalZ, CloseToOracleAtLargeR) {
  for (auto [mu, nu, log_z] : {std::tuple{2.0, 0.5, 1.9343408319439392208},
                               {2.0, 2.0, adaptive_log_z(CmpParams(2, 2)).log_z}}) {
    const CmpParams p(mu, nu);
    const Envelope env = build_envelope(p);
    RngStream rng(2);
    const auto m = estimate_m(p, env, 5000, rng).mhat;
    EXPECT_NEAR(log_reciprocal_z_estimate(m, env), -log_z, 0.01 * log_z) << mu << "," << nu;
  }
}

TEST(LogReciprocalZ, UnbiasedInLinearSpace) {
  for (auto [mu, nu] : {std::pair{0.5, 0.3}, {2.0, 0.5}, {5.0, 3.0}, {10.0, 1.5}, {1.0, 0.7}}) {
    const CmpParams p(mu, nu);
    const Envelope env = build_envelope(p);
    const double truth = std::exp(-adaptive_log_z(p).log_z);
    RngStream rng(31);
    std::vector<double> v;
    for (int i = 0; i < 200; ++i) {
      v.push_back(std::exp(log_reciprocal_z_estimate(estimate_m(p, env, 100, rng).mhat, env)));
    }
    const auto s = summarise(v);
    EXPECT_LT(std::fabs(s.mean - truth), 3 * s.se) << mu << "," << nu;
  }
}

TEST(UnbiasedLoglik, TractableCases) {
  const std::vector<Count> y1{3};
  const std::vector<CmpParams> p1{CmpParams(2, 1)};
  RngStream rng(1);
  const auto e = unbiased_loglik(y1, p1, 7, rng);
  EXPECT_NEAR(e.log_value, std::log(8.0 / 6.0) - 2.0, 1e-12);
  EXPECT_EQ(e.r, 7u);

  const std::vector<Count> y{0, 4, 2};
  const std::vector<CmpParams> p{CmpParams(1.5, 1), CmpParams(3, 1), CmpParams(0.2, 1)};
  const double exact = truncated_loglik(y, p);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(unbiased_loglik(y, p, 3, rng).log_value, exact, 1e-12);
  EXPECT_THROW(unbiased_loglik(y, p, 0, rng), InvalidParameter);
  EXPECT_THROW(unbiased_loglik(y1, p, 1, rng), InvalidParameter);
}

TEST(UnbiasedLoglik, PerObservationUnbiasedAndPositive) {
  const std::vector<Count> y{0, 1, 2, 3, 5, 1, 0, 7, 2, 4};
  std::vector<CmpParams> p;
  for (std::size_t i = 0; i < y.size(); ++i) {
    p.emplace_back(0.5 + 0.6 * static_cast<double>(i), 0.3 + 0.25 * static_cast<double>(i));
  }
  RngStream rng(8);
  std::vector<std::vector<double>> per(y.size());
  for (int rep = 0; rep < 200; ++rep) {
    const auto e = unbiased_loglik(y, p, 1000, rng);
    ASSERT_TRUE(std::isfinite(e.log_value));
    EXPECT_NEAR(e.log_value, std::accumulate(e.per_obs_log.begin(), e.per_obs_log.end(), 0.0),
                1e-9);
    for (std::size_t i = 0; i < y.size(); ++i) per[i].push_back(std::exp(e.per_obs_log[i]));
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double truth = oracle_pmf(p[i], y[i])[y[i]];
    const auto s = summarise(per[i]);
    EXPECT_LT(std::fabs(s.mean - truth), 3 * s.se) << "obs " << i;
  }
}

TEST(UnbiasedLoglik, VarianceDecreasesWithR) {
  const std::vector<Count> y{1, 3, 0, 2, 6, 2};
  std::vector<CmpParams> p;
  for (std::size_t i = 0; i < y.size(); ++i) p.emplace_back(1.0 + static_cast<double>(i), 0.4);
  double previous = INFINITY;
  for (std::uint64_t r : {1, 10, 100, 1000}) {
    RngStream rng(100 + r);
    std::vector<double> v;
    for (int rep = 0; rep < 200; ++rep) v.push_back(unbiased_loglik(y, p, r, rng).log_value);
    const double var = std::pow(summarise(v).sd, 2);
    EXPECT_LT(var, previous) << "r=" << r;
    previous = var;
  }
}

TEST(Bic, Formula) {
  EXPECT_DOUBLE_EQ(bic(3, 126, -190.0), 3 * std::log(126.0) + 380.0);
}
