#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "test_support.hpp"

using namespace test;

namespace {

std::vector<Complex> constant_entries(const GridSpec& g, std::vector<Complex> m) {
  std::vector<Complex> e;
  for (std::size_t p = 0; p < g.size(); ++p) e.insert(e.end(), m.begin(), m.end());
  return e;
}

}  // namespace

TEST(Metric, RejectsNonHermitian) {
  const GridSpec g(2, 4);
  auto e = constant_entries(g, {1.0, Complex(0.1, 0.2), Complex(0.1, 0.2), 1.0});
  try {
    HermitianMetricField m(g, e);
    FAIL() << "accepted a non-Hermitian matrix";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::InvalidMetric);
    EXPECT_NE(std::string(err.what()).find("grid point 0"), std::string::npos);
  }
}

TEST(Metric, RejectsIndefiniteAndLocatesPoint) {
  const GridSpec g(2, 4);
  auto e = constant_entries(g, {1.0, 0.0, 0.0, 1.0});
  e[37 * 4 + 3] = -0.5;
  try {
    HermitianMetricField m(g, e);
    FAIL() << "accepted an indefinite matrix";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::InvalidMetric);
    EXPECT_NE(std::string(err.what()).find("grid point 37"), std::string::npos);
  }
}

TEST(Metric, CholeskyAgreesWithEigen) {
  const GridSpec g(3, 4);
  const HermitianMetricField m = random_metric(g, 4, 1);
  for (std::size_t p = 0; p < g.size(); p += 97) {
    Eigen::Matrix3cd a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = m.at(p)[i * 3 + j];
    EXPECT_NEAR(m.log_det()[p], std::log(a.determinant().real()), 1e-13);
    const Eigen::Matrix3cd inv = a.inverse();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_LT(std::abs(m.cometric(p)[i * 3 + j] - inv(j, i)), 1e-13);
  }
}

TEST(Metric, MinEigenvalueClosedFormMatchesEigen) {
  const GridSpec g(2, 8);
  const HermitianMetricField m = random_metric(g, 2);
  for (std::size_t p = 0; p < g.size(); p += 61) {
    Eigen::Matrix2cd a;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) a(i, j) = m.at(p)[i * 2 + j];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(a);
    EXPECT_NEAR(detail::min_eigenvalue(m.at(p).data(), 2), es.eigenvalues()(0), 1e-14);
  }
}

TEST(VolumeDensity, Examples) {
  const GridSpec g(2, 8);
  const HermitianMetricField flat = HermitianMetricField::identity(g);
  EXPECT_LT(sup_norm(volume_density(flat) - 4.0), 1e-15);

  const ScalarField f = random_band_limited(g, 1, 3, 0.5);
  const ScalarField expect = 4.0 * exponential(2.0 * f);
  EXPECT_LT(sup_norm(volume_density(flat.conformal(f)) - expect), 1e-13);

  const HermitianMetricField m = random_metric(g, 3);
  EXPECT_LT(sup_norm(volume_density(m.scaled(3.0)) - 9.0 * volume_density(m)), 1e-12);
}

TEST(ChernScalar, FlatIsZero) {
  const GridSpec g(2, 8);
  EXPECT_EQ(sup_norm(chern_scalar(HermitianMetricField::identity(g))), 0.0);
  EXPECT_EQ(sup_norm(chern_curvature_oracle(HermitianMetricField::identity(g))), 0.0);
}

TEST(ChernScalar, ConformallyFlatClosedForm) {
  // s = e^-phi (0 - 2 * (1/4) d_xx phi) = 2 pi^2 eps e^-phi cos(2 pi x1).
  const double eps = 0.1;
  const GridSpec g(2, 32);
  const HermitianMetricField m = realize(conformal_flat(eps), g);
  const ScalarField expect = sample(g, [&](auto& x) {
    const double c = std::cos(2 * pi * x[0]);
    return 2 * pi * pi * eps * std::exp(-eps * c) * c;
  });
  const ScalarField s = chern_scalar(m);
  EXPECT_LT(sup_norm(s - expect), 1e-8);
  EXPECT_NEAR(s[0], 2 * pi * pi * eps * std::exp(-eps), 1e-8);
  EXPECT_LT(sup_norm(chern_curvature_oracle(m) - expect), 1e-8);
}

TEST(ChernScalar, InverseScaling) {
  const GridSpec g(2, 16);
  const HermitianMetricField m = random_metric(g, 5);
  const ScalarField s = chern_scalar(m);
  for (double lambda : {0.5, 2.0, 10.0}) {
    EXPECT_LT(sup_norm(chern_scalar(m.scaled(lambda)) - (1.0 / lambda) * s),
              1e-13 * (1.0 + sup_norm(s)));
  }
}

TEST(ChernScalar, AgreesWithCurvatureTensorOracle) {
  const GridSpec g(2, 32);
  for (const MetricSpec& spec : {conformal_flat(), kahler(), nonkahler(), offdiagonal()}) {
    const HermitianMetricField m = realize(spec, g);
    EXPECT_LT(sup_norm(chern_scalar(m) - chern_curvature_oracle(m)), 1e-8);
  }
}

TEST(ChernScalar, OracleAgreesInDimensionThree) {
  // N = 8 only resolves a weak perturbation; the two paths alias differently.
  const GridSpec g(3, 8);
  const HermitianMetricField m = random_metric(g, 8, 1, 0.05);
  EXPECT_LT(sup_norm(chern_scalar(m) - chern_curvature_oracle(m)), 1e-6);
}

TEST(ConformalScalar, Examples) {
  const GridSpec g(2, 16);
  const HermitianMetricField m = realize(nonkahler(), g);
  const ScalarField s = chern_scalar(m);
  EXPECT_LT(sup_norm(conformal_scalar(s, ScalarField(g), m) - s), 1e-15);
  EXPECT_LT(sup_norm(conformal_scalar(s, ScalarField(g, 0.7), m) - std::exp(-0.7) * s), 1e-14);
}

TEST(ConformalScalar, MatchesDirectCurvatureOnFlatBase) {
  const GridSpec g(2, 32);
  const HermitianMetricField flat = HermitianMetricField::identity(g);
  const ScalarField phi = random_band_limited(g, 21, 3, 0.3);
  const ScalarField direct = chern_scalar(flat.conformal(phi));
  EXPECT_LT(sup_norm(direct - conformal_scalar(ScalarField(g), phi, flat)), 1e-8);
}

TEST(ConformalScalar, RandomPairs) {
  const GridSpec g(2, 16);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const HermitianMetricField m = random_metric(g, seed, 2);
    const ScalarField f = random_band_limited(g, 1000 + seed, 2, 0.3);
    EXPECT_LT(sup_norm(chern_scalar(m.conformal(f)) - conformal_scalar(chern_scalar(m), f, m)),
              1e-8);
  }
}
