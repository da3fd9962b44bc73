#pragma once

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "chern_extremal/errors.hpp"
#include "chern_extremal/grid.hpp"

namespace chern_extremal {

namespace detail {

using PointMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, 8, 8>;

inline std::string describe_point(const GridSpec& spec, std::size_t point) {
  std::ostringstream os;
  os << "grid point " << point << " (";
  for (int a = 0; a < spec.axes(); ++a) {
    os << (a % 2 == 0 ? "x" : "y") << a / 2 + 1 << "=" << spec.coordinate(point, a)
       << (a + 1 < spec.axes() ? ", " : ")");
  }
  return os.str();
}

/// Cholesky factorization g = L L^H of a Hermitian matrix (row-major, lower
/// triangle read). On success stores log det g and the trace coefficients
/// cometric[i*n + j] = (g^{-1})_{j i}; returns false if g is not positive
/// definite.
inline bool factor_hermitian(const Complex* g, int n, double& log_det, Complex* cometric) {
  if (n == 2) {
    const double a = g[0].real(), d = g[3].real();
    const Complex b = g[2];
    const double det = a * d - std::norm(b);
    if (!(a > 0.0) || !(det > 0.0)) return false;
    log_det = std::log(det);
    const double r = 1.0 / det;
    cometric[0] = d * r;
    cometric[1] = -b * r;
    cometric[2] = -std::conj(b) * r;
    cometric[3] = a * r;
    return true;
  }
  std::array<Complex, 64> L{};
  log_det = 0.0;
  for (int j = 0; j < n; ++j) {
    double d = g[j * n + j].real();
    for (int k = 0; k < j; ++k) d -= std::norm(L[j * n + k]);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    L[j * n + j] = ljj;
    log_det += 2.0 * std::log(ljj);
    for (int i = j + 1; i < n; ++i) {
      Complex v = g[i * n + j];
      for (int k = 0; k < j; ++k) v -= L[i * n + k] * std::conj(L[j * n + k]);
      L[i * n + j] = v / ljj;
    }
  }
  // Solve L L^H X = I column by column; column c of X is row c of cometric.
  std::array<Complex, 8> y{};
  for (int c = 0; c < n; ++c) {
    Complex* x = cometric + c * n;
    for (int i = 0; i < n; ++i) {
      Complex v = i == c ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) v -= L[i * n + k] * y[k];
      y[i] = v / L[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      Complex v = y[i];
      for (int k = i + 1; k < n; ++k) v -= std::conj(L[k * n + i]) * x[k];
      x[i] = v / L[i * n + i].real();
    }
  }
  return true;
}

/// Smallest eigenvalue of a Hermitian matrix (row-major).
inline double min_eigenvalue(const Complex* g, int n) {
  if (n == 2) {
    const double a = g[0].real(), d = g[3].real();
    return 0.5 * (a + d) - std::hypot(0.5 * (a - d), std::abs(g[1]));
  }
  PointMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g[i * n + j];
  Eigen::SelfAdjointEigenSolver<PointMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace detail

/// Grid of n x n Hermitian positive-definite matrices g_{i jbar}, stored
/// point-major with entry (i, j) at offset i*n + j.
///
/// Construction factors every matrix (Cholesky) and caches the inverse
/// trace coefficients g^{i jbar} together with log det g. The contraction
/// convention is tr_g(H) = g^{i jbar} H_{i jbar}, i.e. g^{i jbar} is the
/// (j, i) entry of the inverse matrix.
class HermitianMetricField {
 public:
  static constexpr double hermitian_tolerance = 1e-14;

  HermitianMetricField(GridSpec spec, std::vector<Complex> entries)
      : spec_(spec),
        entries_(std::move(entries)),
        cometric_(entries_.size()),
        log_det_(spec) {
    const int n = spec_.n();
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    if (n > 8) {
      throw Error(ErrorKind::InvalidArgument, "complex dimension above 8 unsupported");
    }
    if (entries_.size() != nn * spec_.size()) {
      throw Error(ErrorKind::ShapeMismatch, "metric entry count does not match grid");
    }
    for (std::size_t p = 0; p < spec_.size(); ++p) {
      const Complex* g = &entries_[p * nn];
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
          const Complex a = g[i * n + j];
          const Complex b = std::conj(g[j * n + i]);
          if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) ||
              std::abs(a - b) > hermitian_tolerance * (1.0 + std::abs(a))) {
            throw Error(ErrorKind::InvalidMetric,
                        "matrix is not Hermitian at " + detail::describe_point(spec_, p));
          }
        }
      }
      if (!detail::factor_hermitian(g, n, log_det_[p], &cometric_[p * nn])) {
        throw Error(ErrorKind::InvalidMetric,
                    "matrix is not positive definite at " +
                        detail::describe_point(spec_, p));
      }
    }
  }

  static HermitianMetricField identity(const GridSpec& spec) {
    const int n = spec.n();
    std::vector<Complex> e(static_cast<std::size_t>(n) * n * spec.size());
    for (std::size_t p = 0; p < spec.size(); ++p) {
      for (int i = 0; i < n; ++i) e[(p * n + i) * n + i] = 1.0;
    }
    return HermitianMetricField(spec, std::move(e));
  }

  const GridSpec& spec() const noexcept { return spec_; }
  int n() const noexcept { return spec_.n(); }

  /// g_{i jbar} at a point (n*n entries).
  std::span<const Complex> at(std::size_t point) const noexcept {
    const std::size_t nn = static_cast<std::size_t>(n()) * n();
    return {entries_.data() + point * nn, nn};
  }

  /// g^{i jbar} at a point (n*n entries).
  std::span<const Complex> cometric(std::size_t point) const noexcept {
    const std::size_t nn = static_cast<std::size_t>(n()) * n();
    return {cometric_.data() + point * nn, nn};
  }

  std::span<const Complex> entries() const noexcept { return entries_; }

  /// log det(g_{i jbar}) as a field, from the Cholesky diagonal.
  const ScalarField& log_det() const noexcept { return log_det_; }

  ComplexField component(int i, int j) const {
    ComplexField out(spec_);
    const int n = spec_.n();
    for (std::size_t p = 0; p < spec_.size(); ++p) out[p] = at(p)[i * n + j];
    return out;
  }

  HermitianMetricField scaled(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw Error(ErrorKind::InvalidMetric, "scale factor must be positive and finite");
    }
    HermitianMetricField out = *this;
    for (auto& v : out.entries_) v *= lambda;
    for (auto& v : out.cometric_) v /= lambda;
    out.log_det_ += n() * std::log(lambda);
    return out;
  }

  /// e^f g. The factorization is rescaled rather than recomputed:
  /// (e^f g)^{-1} = e^{-f} g^{-1} and log det gains n f.
  HermitianMetricField conformal(const ScalarField& f) const {
    detail::require_same_grid(spec_, f.spec());
    if (!f.all_finite()) throw Error(ErrorKind::InvalidMetric, "conformal factor not finite");
    const std::size_t nn = static_cast<std::size_t>(n()) * n();
    HermitianMetricField out = *this;
    for (std::size_t p = 0; p < spec_.size(); ++p) {
      const double s = std::exp(f[p]);
      const double r = 1.0 / s;
      for (std::size_t q = 0; q < nn; ++q) {
        out.entries_[p * nn + q] *= s;
        out.cometric_[p * nn + q] *= r;
      }
      out.log_det_[p] += n() * f[p];
    }
    return out;
  }

  struct EigenExtreme {
    double value;
    std::size_t point;
  };

  /// Smallest pointwise eigenvalue over the grid and where it occurs.
  EigenExtreme min_eigenvalue() const {
    EigenExtreme best{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t p = 0; p < spec_.size(); ++p) {
      const double v = detail::min_eigenvalue(at(p).data(), n());
      if (v < best.value) best = {v, p};
    }
    return best;
  }

 private:
  GridSpec spec_;
  std::vector<Complex> entries_;
  std::vector<Complex> cometric_;
  ScalarField log_det_;
};

/// omega_f = e^f omega_base.
struct ConformalMetric {
  HermitianMetricField base;
  ScalarField factor;

  HermitianMetricField realize() const { return base.conformal(factor); }
};

/// Density of omega^n / n! against dx_1 dy_1 ... dx_n dy_n, i.e. 2^n det g
/// (since sqrt(-1) dz ^ dzbar = 2 dx ^ dy).
inline ScalarField volume_density(const HermitianMetricField& g) {
  const double two_n = std::ldexp(1.0, g.n());
  ScalarField w = g.log_det().map([two_n](double ld) { return two_n * std::exp(ld); });
  for (std::size_t p = 0; p < w.size(); ++p) {
    if (!(w[p] > 0.0)) {
      throw Error(ErrorKind::InvalidMetric,
                  "non-positive volume density at " + detail::describe_point(g.spec(), p));
    }
  }
  return w;
}

inline double volume(const HermitianMetricField& g) {
  return grid_mean(volume_density(g));
}

}  // namespace chern_extremal
