#include <gtest/gtest.h>

#include <cmath>

#include "compois/envelope.hpp"
#include "compois/error.hpp"
#include "grid.hpp"

using namespace compois;

namespace {

Count search_limit(const CmpParams& p) {
  return static_cast<Count>(20.0 * (std::max(approx_moments(p).mean, 0.0) + 10.0));
}

}  // namespace

TEST(ChooseP, MomentMatching) {
  EXPECT_NEAR(choose_p(CmpParams(1, 0.5)), 0.4, 1e-15);
  EXPECT_NEAR(choose_p(CmpParams(1, 1)), 0.5, 1e-15);
  EXPECT_NEAR(choose_p(CmpParams(10, 0.1)), 0.2 / 3.1, 1e-15);
  for (double mu : test_grid::kMu) {
    for (double nu : {0.1, 0.3, 0.7}) {
      const CmpParams p(mu, nu);
      const double q = choose_p(p);
      EXPECT_NEAR((1 - q) / q, approx_moments(p).mean, 1e-12 * (1 + approx_moments(p).mean));
    }
  }
}

TEST(BuildEnvelope, BranchSelectionAndClosedForms) {
  const Envelope a = build_envelope(CmpParams(2, 2));
  EXPECT_EQ(a.kind, EnvelopeKind::Poisson);
  EXPECT_DOUBLE_EQ(a.gamma, 2.0);
  EXPECT_DOUBLE_EQ(a.log_zg, 2.0);
  EXPECT_NEAR(a.log_b, std::log(2.0), 1e-15);

  for (double mu : {0.3, 1.0, 7.5, 40.0}) {
    const Envelope e = build_envelope(CmpParams(mu, 1.0));
    EXPECT_EQ(e.kind, EnvelopeKind::Poisson);
    EXPECT_EQ(e.log_b, 0.0);
  }

  const Envelope g = build_envelope(CmpParams(1, 0.5));
  EXPECT_EQ(g.kind, EnvelopeKind::Geometric);
  EXPECT_NEAR(g.gamma, 0.4, 1e-15);
  EXPECT_EQ(g.log_zg, 0.0);
  EXPECT_EQ(g.sup_at, 2u);
  EXPECT_NEAR(std::exp(g.log_b), 2.5 / (0.36 * std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(std::exp(g.log_b), 4.9105, 1e-4);
}

TEST(BuildEnvelope, OverrideValidated) {
  EXPECT_THROW(build_envelope(CmpParams(1, 0.5), 0.0), InvalidParameter);
  EXPECT_THROW(build_envelope(CmpParams(1, 0.5), 1.0), InvalidParameter);
  EXPECT_NEAR(build_envelope(CmpParams(1, 0.5), 0.3).gamma, 0.3, 0);
}

TEST(EnvelopeLogDensity, DirectEvaluation) {
  const Envelope g = build_envelope(CmpParams(1, 0.5));
  EXPECT_NEAR(envelope_log_density(g, 0), std::log(0.4), 1e-15);
  EXPECT_NEAR(envelope_log_density(g, 3), std::log(0.4 * 0.6 * 0.6 * 0.6), 1e-14);
  const Envelope p = build_envelope(CmpParams(2, 2));
  EXPECT_NEAR(envelope_log_density(p, 2), std::log(2.0), 1e-15);
}

TEST(BruteForceBound, KnownSupremumLocations) {
  const CmpParams a(2, 2);
  const auto sa = brute_force_bound(a, build_envelope(a), 500);
  EXPECT_NEAR(sa.log_b, std::log(2.0), 1e-14);
  EXPECT_TRUE(sa.argmax == 2 || sa.argmax == 1);

  const CmpParams b(1, 0.5);
  const auto sb = brute_force_bound(b, build_envelope(b), 500);
  EXPECT_EQ(sb.argmax, 2u);
  EXPECT_NEAR(sb.log_b, build_envelope(b).log_b, 1e-12);

  // Brute force over 0..2999 at 40 digits: sup at y = 11 with log value
  // 4.5573971877485247448.
  const CmpParams c(7.3, 0.25);
  const Envelope ec = build_envelope(c);
  const auto sc = brute_force_bound(c, ec, 3000);
  EXPECT_EQ(sc.argmax, 11u);
  EXPECT_EQ(ec.sup_at, 11u);
  EXPECT_NEAR(sc.log_b, 4.5573971877485247448, 1e-11);
}

TEST(BuildEnvelope, BoundIsExactSupremumOnGrid) {
  for (double mu : test_grid::kMu) {
    for (double nu : test_grid::kNu) {
      const CmpParams p(mu, nu);
      const Envelope env = build_envelope(p);
      const Count ymax = search_limit(p);
      const auto s = brute_force_bound(p, env, ymax);
      EXPECT_NEAR(s.log_b, env.log_b, 1e-10 * std::max(1.0, std::fabs(env.log_b)))
          << mu << "," << nu;
      const Count expected = env.sup_at;
      const bool tie = std::fabs(log_unnormalized_mass(p, expected) -
                                 envelope_log_density(env, expected) - s.log_b) < 1e-10;
      EXPECT_TRUE(s.argmax == expected || tie) << mu << "," << nu;
      for (Count y = 0; y <= ymax; ++y) {
        ASSERT_LE(log_unnormalized_mass(p, y), env.log_b + envelope_log_density(env, y) + 1e-12)
            << mu << "," << nu << " y=" << y;
      }
    }
  }
}

TEST(BuildEnvelope, AnyGeometricParameterDominates) {
  for (double mu : {0.5, 2.0, 7.3}) {
    for (double nu : {0.2, 0.6, 0.9}) {
      const CmpParams p(mu, nu);
      for (double q : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const Envelope env = build_envelope(p, q);
        for (Count y = 0; y <= 2000; ++y) {
          ASSERT_LE(log_unnormalized_mass(p, y),
                    env.log_b + envelope_log_density(env, y) + 1e-12)
              << mu << "," << nu << " p=" << q << " y=" << y;
        }
      }
    }
  }
}

TEST(DecomposeBound, Identity) {
  const CmpParams p(2, 0.5);
  const auto d = decompose_bound(p, build_envelope(p));
  EXPECT_NEAR(d.log_m, d.log_zg - d.log_zf + d.log_b, 1e-15);
  EXPECT_NEAR(std::exp(d.log_m), 1.6026842545492329761, 1e-12);
  const CmpParams q(5, 3);
  EXPECT_NEAR(std::exp(decompose_bound(q, build_envelope(q)).log_m), 1.6372575413037614606,
              1e-11);
}
