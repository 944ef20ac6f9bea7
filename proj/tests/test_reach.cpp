#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rws/error.hpp"
#include "rws/reach.hpp"
#include "rws/rng.hpp"

namespace rws {
namespace {

TEST(Reach, ScoreIsASigmoid) {
  ReachabilityClassifier c;
  c.slope = 1.0;
  EXPECT_EQ(score(c, 0.0), 0.5);
  EXPECT_NEAR(score(c, -2.0), 0.11920292202211755, 1e-15);
  c.slope = 0.0;
  EXPECT_EQ(score(c, -7.0), 0.5);
  EXPECT_THROW(score(c, std::nan("")), ValidationError);
  EXPECT_THROW(score(c, INFINITY), ValidationError);
}

TEST(Reach, ScoreStaysInsideTheOpenInterval) {
  ReachabilityClassifier c;
  c.slope = 1e6;
  const double hi = score(c, 1.0), lo = score(c, -1.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_GT(lo, 0.0);
  EXPECT_NEAR(lo, 1.0 / (1.0 + std::exp(30.0)), 1e-25);
}

TEST(Reach, ClosedFormLossAtOneHalf) {
  const std::vector<double> half(16, 0.5);
  EXPECT_NEAR(pu_loss(half, half, 0.5, PuVariant::StandardNnpu), 0.6931471805599453, 1e-12);
  EXPECT_NEAR(pu_loss(half, half, 0.5, PuVariant::Literal), 0.34657359027997264, 1e-12);
}

TEST(Reach, EmptyBatchesAreRejected) {
  const std::vector<double> one{0.5}, none;
  EXPECT_THROW(pu_loss(none, one, 0.5, PuVariant::StandardNnpu), ValidationError);
  EXPECT_THROW(pu_loss(one, none, 0.5, PuVariant::StandardNnpu), ValidationError);
  EXPECT_THROW(pu_gradient(ReachabilityClassifier{}, none, one), ValidationError);
}

TEST(Reach, StandardRiskIsNonNegative) {
  Rng rng(23);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> p(1 + rng.uniform_index(20)), u(1 + rng.uniform_index(20));
    for (double& v : p) v = rng.uniform_real(1e-6, 1.0 - 1e-6);
    for (double& v : u) v = rng.uniform_real(1e-6, 1.0 - 1e-6);
    EXPECT_GE(pu_loss(p, u, rng.uniform_real(0.01, 0.99), PuVariant::StandardNnpu), 0.0);
  }
}

TEST(Reach, LiteralRiskGoesNegativeOnSeparatedData) {
  const std::vector<double> p(8, 0.999), u(8, 0.001);
  EXPECT_LT(pu_loss(p, u, 0.5, PuVariant::Literal), 0.0);
  EXPECT_GE(pu_loss(p, u, 0.5, PuVariant::StandardNnpu), 0.0);
}

TEST(Reach, GradientMatchesFiniteDifferences) {
  Rng rng(29);
  for (PuVariant variant : {PuVariant::StandardNnpu, PuVariant::Literal}) {
    for (int trial = 0; trial < 100; ++trial) {
      ReachabilityClassifier c;
      c.slope = rng.uniform_real(-1.0, 2.0);
      c.intercept = rng.uniform_real(-2.0, 2.0);
      c.eta_p = rng.uniform_real(0.1, 0.9);
      c.variant = variant;
      std::vector<double> qp(1 + rng.uniform_index(16)), qu(1 + rng.uniform_index(16));
      for (double& v : qp) v = rng.uniform_real(-5.0, 0.0);
      for (double& v : qu) v = rng.uniform_real(-10.0, 0.0);
      const auto f = [&](const std::vector<double>& x) {
        ReachabilityClassifier d = c;
        d.slope = x[0];
        d.intercept = x[1];
        std::vector<double> sp, su;
        for (double q : qp) sp.push_back(score(d, q));
        for (double q : qu) su.push_back(score(d, q));
        return pu_loss(sp, su, d.eta_p, d.variant);
      };
      const std::vector<double> x{c.slope, c.intercept};
      const PuGradient g = pu_gradient(c, qp, qu);
      EXPECT_NEAR(g.loss, f(x), 1e-12);
      const std::vector<double> numeric{oracle::central_difference(f, x, 0),
                                        oracle::central_difference(f, x, 1)};
      EXPECT_LT(oracle::relative_error({g.d_slope, g.d_intercept}, numeric), 1e-4);
    }
  }
}

TEST(Reach, ClampedRiskUsesOnlyThePositiveTerm) {
  // Positives score high, unlabeled low: the negative-class risk estimate is
  // below zero and the standard form clamps it away.
  ReachabilityClassifier c;
  c.slope = 1.0;
  c.intercept = 3.0;
  const std::vector<double> qp{-0.5, -1.0, -0.2}, qu{-9.0, -8.0, -7.5};
  const PuGradient g = pu_gradient(c, qp, qu);
  double ds = 0.0, di = 0.0;
  for (double q : qp) {
    const double s = 1.0 / (1.0 + std::exp(-(q + 3.0)));
    ds -= (1.0 - s) * q;
    di -= (1.0 - s);
  }
  ds *= c.eta_p / 3.0;
  di *= c.eta_p / 3.0;
  EXPECT_NEAR(g.d_slope, ds, 1e-14);
  EXPECT_NEAR(g.d_intercept, di, 1e-14);
  const ReachabilityClassifier next = classifier_update(c, qp, qu, 0.1);
  EXPECT_NEAR(next.slope, 1.0 - 0.1 * ds, 1e-14);
  EXPECT_NEAR(next.intercept, 3.0 - 0.1 * di, 1e-14);
}

TEST(Reach, LearnsPositiveSlopeOnSeparatedData) {
  Rng rng(31);
  ReachabilityClassifier c;
  std::vector<double> qp(256), qu(256);
  for (int it = 0; it < 2000; ++it) {
    for (double& v : qp) v = rng.uniform_real(-2.0, 0.0);
    for (double& v : qu)
      v = rng.uniform01() < 0.5 ? rng.uniform_real(-2.0, 0.0) : rng.uniform_real(-10.0, -6.0);
    c = classifier_update(c, qp, qu, 0.05);
  }
  EXPECT_GT(c.slope, 0.0);
  int correct = 0;
  for (int k = 0; k < 1000; ++k) {
    correct += score(c, rng.uniform_real(-2.0, 0.0)) > 0.5;
    correct += score(c, rng.uniform_real(-10.0, -6.0)) < 0.5;
  }
  EXPECT_GE(correct, 1900);
}

TEST(Reach, VariantNamesRoundTrip) {
  for (PuVariant v : {PuVariant::StandardNnpu, PuVariant::Literal})
    EXPECT_EQ(parse_pu_variant(pu_variant_name(v)), v);
  EXPECT_THROW(parse_pu_variant("nnpu"), ValidationError);
  ReachabilityClassifier c;
  c.eta_p = 1.0;
  EXPECT_THROW(validate(c), ValidationError);
  c.eta_p = 0.5;
  c.slope = NAN;
  EXPECT_THROW(validate(c), ValidationError);
}

}  // namespace
}  // namespace rws
