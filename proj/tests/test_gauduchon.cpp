#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace test;

TEST(Gauduchon, FlatFactorIsZero) {
  const GridSpec g(2, 8);
  const GauduchonResult r = gauduchon_factor(HermitianMetricField::identity(g), solver(g));
  EXPECT_LT(sup_norm(r.factor), 1e-14);
  EXPECT_LT(r.residual, 1e-14);
}

TEST(Gauduchon, KahlerFactorIsZero) {
  const GridSpec g(2, 16);
  const HermitianMetricField m = realize(kahler(), g);
  EXPECT_LT(verify_gauduchon(m), 1e-10);
  EXPECT_LT(sup_norm(gauduchon_factor(m, solver(g)).factor), 1e-10);
}

TEST(Gauduchon, ConformallyFlatUndoesTheFactor) {
  const GridSpec g(2, 32);
  const MetricSpec spec = conformal_flat(0.1);
  const HermitianMetricField m = realize(spec, g);
  EXPECT_GT(verify_gauduchon(m), 1e-3);
  const ScalarField phi = evaluate(std::get<ConformalFlatMetric>(spec).phi, g);
  const GauduchonResult r = gauduchon_factor(m, solver(g));
  EXPECT_LT(distance_to_constant(r.factor + phi), 1e-7);
}

TEST(Gauduchon, NonKahlerSolve) {
  const GridSpec g(2, 32);
  const HermitianMetricField m = realize(nonkahler(), g);
  EXPECT_GT(verify_gauduchon(m), 1e-3);
  const GauduchonResult r = gauduchon_factor(m, solver(g));
  EXPECT_TRUE(r.report.converged);
  EXPECT_LT(r.residual, 1e-8);
  const HermitianMetricField mG = m.conformal(r.factor);
  EXPECT_LT(verify_gauduchon(mG), 1e-8);
  EXPECT_NEAR(volume(mG), volume(m), 1e-12 * volume(m));
}

TEST(Gauduchon, Idempotent) {
  const GridSpec g(2, 16);
  const HermitianMetricField m = realize(offdiagonal(), g);
  const HermitianMetricField mG = m.conformal(gauduchon_factor(m, solver(g)).factor);
  EXPECT_LT(sup_norm(gauduchon_factor(mG, solver(g)).factor), 1e-8);
}

TEST(Gauduchon, DependsOnlyOnTheConformalClass) {
  const GridSpec g(2, 16);
  const HermitianMetricField m = realize(nonkahler(), g);
  const ScalarField h = random_band_limited(g, 9, 3, 0.3);
  const ScalarField f = gauduchon_factor(m, solver(g)).factor;
  const ScalarField fh = gauduchon_factor(m.conformal(h), solver(g)).factor;
  EXPECT_LT(distance_to_constant(fh + h - f), 1e-8);
}

TEST(Gauduchon, RandomMetricsGivePositiveWeights) {
  const GridSpec g(2, 16);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const HermitianMetricField m = random_metric(g, seed);
    const GauduchonResult r = gauduchon_factor(m, solver(g));
    EXPECT_TRUE(r.factor.all_finite());
    EXPECT_LT(verify_gauduchon(m.conformal(r.factor)), 1e-8);
  }
}

TEST(Gauduchon, DimensionThree) {
  const GridSpec g(3, 8);
  const HermitianMetricField m = random_metric(g, 2, 1, 0.5);
  const GauduchonResult r = gauduchon_factor(m, solver(g));
  EXPECT_LT(verify_gauduchon(m.conformal(r.factor)), 1e-8);
}
