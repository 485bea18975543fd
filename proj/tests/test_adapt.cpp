#include "support.hpp"

#include <gtest/gtest.h>

using namespace odekit;
using namespace odekit::testing;

TEST(WeightedErrorNorm, EqualVectorsGiveZero) {
  const Vector u = vec({1, 2, 3});
  EXPECT_EQ(weighted_error_norm(u, u, ToleranceSpec::scalar(1e-6, 1e-6)), 0.0);
  EXPECT_EQ(weighted_error_norm(u, u, ToleranceSpec::scalar(1e-6, 1e-6), NormKind::Two), 0.0);
}

TEST(WeightedErrorNorm, ScalarFormula) {
  const double w = weighted_error_norm(vec({1.0}), vec({0.99}), ToleranceSpec::scalar(1e-2, 1e-3));
  EXPECT_NEAR(w, 0.01 / (0.01 + 0.001 * 1.0), 1e-12);
}

TEST(WeightedErrorNorm, OregoVectorTolerances) {
  const ToleranceSpec tol = ToleranceSpec::vector(vec({1e-2, 1e-1, 1e-4}), 0.0);
  const Vector u = Vector::Zero(3);
  EXPECT_NEAR(weighted_error_norm(u, vec({0.0, 1e-2, 0.0}), tol), 0.1, 1e-15);
  EXPECT_NEAR(weighted_error_norm(u, vec({1e-2, 0.0, 0.0}), tol), 1.0, 1e-15);
  EXPECT_NEAR(weighted_error_norm(u, vec({0.0, 0.0, 1e-2}), tol), 100.0, 1e-12);
}

TEST(WeightedErrorNorm, TwoNormIsRms) {
  const ToleranceSpec tol = ToleranceSpec::scalar(1.0, 0.0);
  EXPECT_NEAR(weighted_error_norm(vec({0, 0}), vec({3, 4}), tol, NormKind::Two), std::sqrt(12.5), 1e-14);
}

TEST(ToleranceSpec, Validation) {
  EXPECT_THROW(ToleranceSpec::scalar(0.0, 0.0).validate(2), ConfigError);
  EXPECT_THROW(ToleranceSpec::vector(vec({1e-3, 1e-3}), 1e-3).validate(3), ConfigError);
  EXPECT_THROW(ToleranceSpec::scalar(-1.0, 1e-3).validate(1), ConfigError);
  EXPECT_NO_THROW(ToleranceSpec::vector(vec({1e-3, 0.0, 1e-2}), 0.0).validate(3));
}

TEST(AdaptDecide, UnitErrorOrderOne) {
  const AdaptDecision d = adapt_decide(AdaptConfig{}, 1.0, 1, 0.1, false);
  EXPECT_TRUE(d.accept);
  EXPECT_DOUBLE_EQ(d.factor, 0.9);
  EXPECT_DOUBLE_EQ(d.next_dt, 0.09);
}

TEST(AdaptDecide, HugeErrorRejectsWithClipAndRejectFactor) {
  const AdaptDecision d = adapt_decide(AdaptConfig{}, 1e6, 3, 0.1, false);
  EXPECT_FALSE(d.accept);
  EXPECT_DOUBLE_EQ(d.factor, 0.1 * 0.5);
  EXPECT_DOUBLE_EQ(d.next_dt, 0.1 * 0.05);
}

TEST(AdaptDecide, NoneAlwaysAccepts) {
  AdaptConfig c;
  c.kind = AdaptKind::None;
  const AdaptDecision d = adapt_decide(c, 1e9, 2, 0.25, false);
  EXPECT_TRUE(d.accept);
  EXPECT_EQ(d.next_dt, 0.25);
}

TEST(AdaptDecide, TinyErrorClipsHigh) {
  const AdaptDecision d = adapt_decide(AdaptConfig{}, 0.0, 2, 0.1, false);
  EXPECT_TRUE(d.accept);
  EXPECT_DOUBLE_EQ(d.factor, 10.0);
}

TEST(AdaptDecide, NoGrowthRightAfterRejection) {
  const AdaptDecision d = adapt_decide(AdaptConfig{}, 1e-6, 2, 0.1, true);
  EXPECT_LE(d.factor, 1.0);
}

TEST(AdaptDecide, FactorMonotoneInError) {
  for (AdaptKind kind : {AdaptKind::Basic, AdaptKind::DSP}) {
    AdaptConfig c;
    c.kind = kind;
    AdaptHistory h;
    adapt_record(h, 0.3, 0.05);
    for (int p : {1, 2, 4}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double w = 1e-8; w < 1e8; w *= 1.7) {
        const double f = adapt_decide(c, w, p, 0.1, false, &h).factor;
        EXPECT_LE(f, prev) << to_string(kind) << " p=" << p << " w=" << w;
        prev = f;
      }
    }
  }
}

TEST(AdaptDecide, StepRatioBounds) {
  const AdaptConfig c;
  for (double w : {0.0, 1e-12, 0.5, 1.0, 1.01, 10.0, 1e12})
    for (bool rej : {false, true}) {
      const AdaptDecision d = adapt_decide(c, w, 3, 1.0, rej);
      EXPECT_GE(d.next_dt, c.clip_low * c.reject_factor);
      EXPECT_LE(d.next_dt, c.clip_high);
    }
}

TEST(AdaptDecide, DspUnitFilterReproducesBasic) {
  AdaptConfig basic, dsp;
  dsp.kind = AdaptKind::DSP;
  dsp.dsp_filter = {1.0, 0.0, 0.0};
  AdaptHistory h;
  adapt_record(h, 0.37, 0.02);
  for (double w : {1e-3, 0.2, 0.7, 0.999})
    for (int p : {1, 3, 5}) {
      const AdaptDecision a = adapt_decide(basic, w, p, 0.03, false, &h);
      const AdaptDecision b = adapt_decide(dsp, w, p, 0.03, false, &h);
      EXPECT_EQ(a.factor, b.factor);
      EXPECT_EQ(a.next_dt, b.next_dt);
    }
}

TEST(AdaptDecide, DtBoundsClamp) {
  AdaptConfig c;
  c.dt_min = 0.05;
  c.dt_max = 0.2;
  EXPECT_DOUBLE_EQ(adapt_decide(c, 1e-9, 1, 0.1, false).next_dt, 0.2);
  EXPECT_DOUBLE_EQ(adapt_decide(c, 1e9, 1, 0.1, false).next_dt, 0.05);
}

TEST(AdaptDecide, BasicTracksSafetyPowerOnExactErrorModel) {
  const AdaptConfig c;
  for (int p : {1, 2, 3, 4}) {
    const double C = 37.0;
    double dt = 1e-3, werr = 0.0;
    for (int step = 0; step < 5; ++step) {
      werr = C * std::pow(dt, p + 1);
      dt = adapt_decide(c, werr, p, dt, false).next_dt;
    }
    werr = C * std::pow(dt, p + 1);
    const double target = std::pow(c.safety, p + 1);
    EXPECT_NEAR(werr, target, 0.2 * target) << "p=" << p;
  }
}

TEST(AdaptConfig, Validation) {
  AdaptConfig c;
  c.clip_low = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_adapt_kind("dsp"), AdaptKind::DSP);
  EXPECT_THROW(parse_adapt_kind("pid"), ConfigError);
}
