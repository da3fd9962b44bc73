#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "chern_extremal/chern_extremal.hpp"

namespace test {

using namespace chern_extremal;

constexpr double pi = std::numbers::pi;

inline TrigTerm term(std::vector<int> mode, double amplitude, double phase = 0.0) {
  return {std::move(mode), amplitude, phase};
}

inline MetricSpec conformal_flat(double eps = 0.1) {
  return ConformalFlatMetric{{term({1, 0, 0, 0}, eps)}};
}

/// g_{1 1bar} = 1 + eps cos(2 pi x1): a function of z1 only, so Kahler.
inline MetricSpec kahler(double eps = 0.3) {
  return PerturbedHermitianMetric{{{0, 0, false, {term({1, 0, 0, 0}, eps)}}}};
}

/// g_{1 1bar} = 1 + eps cos(2 pi x2).
inline MetricSpec nonkahler(double eps = 0.3) {
  return PerturbedHermitianMetric{{{0, 0, false, {term({0, 0, 1, 0}, eps)}}}};
}

inline MetricSpec offdiagonal() {
  return PerturbedHermitianMetric{{
      {0, 0, false, {term({0, 0, 0, 1}, 0.2)}},
      {1, 1, false, {term({1, 1, 0, 0}, 0.15, 0.5)}},
      {0, 1, false, {term({0, 1, 1, 0}, 0.1)}},
      {0, 1, true, {term({1, 0, 0, 1}, 0.1, 1.0)}},
  }};
}

/// Identity plus random band-limited entries: diagonal amplitude 0.3 * scale,
/// real and imaginary off-diagonal parts 0.1 * scale each.
inline HermitianMetricField random_metric(const GridSpec& grid, std::uint64_t seed,
                                          int modes = 2, double scale = 1.0) {
  const int n = grid.n();
  std::vector<Complex> e(static_cast<std::size_t>(n) * n * grid.size());
  std::uint64_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const ScalarField re = random_band_limited(grid, seed * 101 + k++, modes, scale * (i == j ? 0.3 : 0.1));
      const ScalarField im = random_band_limited(grid, seed * 101 + k++, modes, scale * 0.1);
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const Complex v = i == j ? Complex(1.0 + re[p], 0.0) : Complex(re[p], im[p]);
        e[(p * n + i) * n + j] = v;
        e[(p * n + j) * n + i] = std::conj(v);
      }
    }
  }
  return HermitianMetricField(grid, std::move(e));
}

inline KrylovConfig solver(const GridSpec& grid) { return KrylovConfig::for_grid(grid); }

/// Field from a pointwise function of the coordinates (x1, y1, x2, y2, ...).
template <class F>
ScalarField sample(const GridSpec& grid, F&& f) {
  ScalarField out(grid);
  std::vector<double> x(grid.axes());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (int a = 0; a < grid.axes(); ++a) x[a] = grid.coordinate(p, a);
    out[p] = f(x);
  }
  return out;
}

inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace test
