#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace test;

TEST(MeanScalar, FlatIsZeroAndScales) {
  const GridSpec g(2, 16);
  EXPECT_EQ(mean_scalar(HermitianMetricField::identity(g)), 0.0);

  const HermitianMetricField m = realize(nonkahler(), g);
  const HermitianMetricField mG = m.conformal(gauduchon_factor(m, solver(g)).factor);
  const double C = mean_scalar(mG);
  for (double lambda : {0.5, 3.0}) {
    EXPECT_NEAR(mean_scalar(mG.scaled(lambda)), C / lambda, 1e-12);
  }
}

TEST(MeanScalar, RefusesNonGauduchon) {
  const GridSpec g(2, 16);
  try {
    mean_scalar(realize(nonkahler(), g));
    FAIL() << "accepted a non-Gauduchon metric";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotGauduchon);
  }
}

TEST(TotalScalar, ScalesWithPowerNMinusOne) {
  const GridSpec g(2, 16);
  const HermitianMetricField m = realize(offdiagonal(), g);
  const double T = total_scalar(m);
  EXPECT_NEAR(total_scalar(m.scaled(4.0)), 4.0 * T, 1e-12 * (1.0 + std::abs(T)));
  EXPECT_EQ(total_scalar(HermitianMetricField::identity(g)), 0.0);
}

TEST(Extremal, FlatIsAlreadyExtremal) {
  const GridSpec g(2, 16);
  const ExtremalResult r = extremal_factor(HermitianMetricField::identity(g), solver(g));
  EXPECT_LT(sup_norm(r.factor), 1e-14);
  EXPECT_EQ(r.el_residual, 0.0);
}

TEST(Extremal, ConformallyFlatReturnsToFlat) {
  const GridSpec g(2, 32);
  const MetricSpec spec = conformal_flat(0.1);
  const ExtremalResult r = extremal_factor(realize(spec, g), solver(g));
  // The closed form is -phi up to the volume gauge constant.
  EXPECT_LT(distance_to_constant(r.factor - *analytic_extremal_factor(spec, g)), 1e-8);
}

TEST(Extremal, NonKahlerSolve) {
  const GridSpec g(2, 32);
  const HermitianMetricField m = realize(nonkahler(), g);
  const ExtremalResult r = extremal_factor(m, solver(g));
  EXPECT_LT(r.el_residual, 1e-6);
  EXPECT_LT(r.poisson_residual, 1e-9);
  const HermitianMetricField mE = m.conformal(r.factor);
  EXPECT_NEAR(volume(mE), volume(m), 1e-12 * volume(m));
  EXPECT_LT(el_residual(mE, 2.0).norm, 1e-6);
}

TEST(Extremal, ScalarCurvatureIsConstantUpToTheFactor) {
  // s_E = e^{-(f_poisson + shift)} C.
  const GridSpec g(2, 16);
  const HermitianMetricField m = realize(offdiagonal(), g);
  const ExtremalResult r = extremal_factor(m, solver(g));
  const ScalarField sE = chern_scalar(m.conformal(r.factor));
  ScalarField u = r.poisson;
  u += r.volume_shift;
  const double scale = 1.0 + sup_norm(chern_scalar(m.conformal(r.gauduchon.factor)));
  EXPECT_LT(sup_norm(sE * exponential(u) - r.mean_curvature), 1e-6 * scale);
}

TEST(Extremal, IndependentOfStartingGuess) {
  const GridSpec g(2, 16);
  const HermitianMetricField m = realize(nonkahler(), g);
  const ScalarField base = extremal_factor(m, solver(g)).factor;
  for (std::uint64_t seed : {11u, 12u}) {
    KrylovConfig cfg = solver(g);
    cfg.random_start_seed = seed;
    EXPECT_LT(sup_norm(extremal_factor(m, cfg).factor - base), 1e-8);
  }
}

TEST(Extremal, DependsOnlyOnTheConformalClass) {
  const GridSpec g(2, 16);
  const HermitianMetricField m = realize(nonkahler(), g);
  const ScalarField h = random_band_limited(g, 3, 3, 0.3);
  const ScalarField f = extremal_factor(m, solver(g)).factor;
  const ScalarField fh = extremal_factor(m.conformal(h), solver(g)).factor;
  EXPECT_LT(distance_to_constant(fh + h - f), 1e-7);
}

TEST(Extremal, RejectsLargeResidual) {
  const GridSpec g(2, 8);
  ExtremalTolerances tols;
  tols.el_reject = 1e-30;
  try {
    extremal_factor(realize(offdiagonal(), g), solver(g), tols);
    FAIL() << "accepted a residual above the rejection threshold";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ResidualTooLarge);
  }
}

TEST(ClassifySign, TorusDegreeIsZero) {
  const GridSpec g(2, 16);
  for (const MetricSpec& spec : {MetricSpec(FlatMetric{}), conformal_flat(), nonkahler()}) {
    const SignClassification c = classify_sign(realize(spec, g), solver(g));
    EXPECT_EQ(c.sign, CurvatureSign::Zero);
    EXPECT_TRUE(c.consistent);
  }
  EXPECT_EQ(to_string(CurvatureSign::Negative), "Negative");
}
