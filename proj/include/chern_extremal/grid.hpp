#pragma once

// Periodic grid on the torus C^n / (Z^n + i Z^n).
//
// Coordinates: z^j = x_j + i y_j, every real axis has unit period and N
// samples. Fields are stored row-major over the axis order
// (x_1, y_1, ..., x_n, y_n), so x_1 is the slowest index.
//
// Wirtinger convention (used by every module, nowhere else restated):
//   d/dz^j    = 1/2 (d/dx_j - i d/dy_j)
//   d/dzbar^j = 1/2 (d/dx_j + i d/dy_j)
// On the Fourier mode exp(2 pi i (k.x + l.y)) these act as
//   d/dz^j    -> pi (i k_j + l_j)
//   d/dzbar^j -> pi (i k_j - l_j)
// First-derivative symbols vanish on the Nyquist wavenumber of their own
// axis (keeps them odd, hence exactly skew on the grid). The diagonal mixed
// symbol d/dz^j d/dzbar^j = 1/4 (d_xx + d_yy) uses the true second
// derivative symbol, so the flat Laplacian has only constants in its kernel.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <new>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "chern_extremal/errors.hpp"
#include "chern_extremal/fft.hpp"

namespace chern_extremal {

using Complex = std::complex<double>;

class GridSpec {
 public:
  GridSpec(int n, int N) : n_(n), N_(N) {
    if (n < 2 || n > 8) {
      throw Error(ErrorKind::InvalidArgument,
                  "complex dimension must lie in [2, 8], got " + std::to_string(n));
    }
    if (N < 4 || (N & (N - 1)) != 0) {
      throw Error(ErrorKind::InvalidArgument,
                  "samples per axis must be a power of two >= 4, got " +
                      std::to_string(N));
    }
    size_ = 1;
    for (int a = 0; a < 2 * n; ++a) {
      size_ *= static_cast<std::size_t>(N);
    }
  }

  int n() const noexcept { return n_; }
  int N() const noexcept { return N_; }
  int axes() const noexcept { return 2 * n_; }
  std::size_t size() const noexcept { return size_; }

  std::size_t stride(int axis) const noexcept {
    std::size_t s = 1;
    for (int a = axis + 1; a < axes(); ++a) s *= static_cast<std::size_t>(N_);
    return s;
  }

  /// Grid index along `axis` of the flat point index.
  int index(std::size_t point, int axis) const noexcept {
    return static_cast<int>((point / stride(axis)) % static_cast<std::size_t>(N_));
  }

  double coordinate(std::size_t point, int axis) const noexcept {
    return static_cast<double>(index(point, axis)) / N_;
  }

  bool operator==(const GridSpec& other) const noexcept {
    return n_ == other.n_ && N_ == other.N_;
  }

 private:
  int n_;
  int N_;
  std::size_t size_ = 0;
};

namespace detail {

template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    return static_cast<T*>(::operator new(count * sizeof(T), alignment));
  }
  void deallocate(T* ptr, std::size_t) noexcept {
    ::operator delete(ptr, alignment);
  }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) {
    throw Error(ErrorKind::ShapeMismatch,
                "fields live on different grids (n=" + std::to_string(a.n()) +
                    ",N=" + std::to_string(a.N()) + " vs n=" +
                    std::to_string(b.n()) + ",N=" + std::to_string(b.N()) + ")");
  }
}

}  // namespace detail

/// Values sampled on every point of a GridSpec. Storage is 64-byte aligned
/// so buffers can be handed to the FFT backend directly.
template <class T>
class BasicField {
 public:
  using value_type = T;
  using Storage = std::vector<T, detail::AlignedAllocator<T>>;

  explicit BasicField(GridSpec spec, T value = T{})
      : spec_(spec), values_(spec.size(), value) {}

  BasicField(GridSpec spec, Storage values)
      : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.size()) {
      throw Error(ErrorKind::ShapeMismatch,
                  "expected " + std::to_string(spec_.size()) + " values, got " +
                      std::to_string(values_.size()));
    }
  }

  const GridSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  T* data() noexcept { return values_.data(); }
  const T* data() const noexcept { return values_.data(); }

  T& operator[](std::size_t i) noexcept { return values_[i]; }
  const T& operator[](std::size_t i) const noexcept { return values_[i]; }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](const T& v) {
      if constexpr (std::is_same_v<T, Complex>) {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
      } else {
        return std::isfinite(v);
      }
    });
  }

  template <class F>
  BasicField map(F&& f) const {
    BasicField out(spec_);
    for (std::size_t i = 0; i < size(); ++i) out.values_[i] = f(values_[i]);
    return out;
  }

  BasicField& operator+=(const BasicField& o) {
    detail::require_same_grid(spec_, o.spec_);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  BasicField& operator-=(const BasicField& o) {
    detail::require_same_grid(spec_, o.spec_);
    for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  BasicField& operator*=(const BasicField& o) {
    detail::require_same_grid(spec_, o.spec_);
    for (std::size_t i = 0; i < size(); ++i) values_[i] *= o.values_[i];
    return *this;
  }
  BasicField& operator*=(T s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  BasicField& operator+=(T s) {
    for (auto& v : values_) v += s;
    return *this;
  }
  BasicField& operator-=(T s) {
    for (auto& v : values_) v -= s;
    return *this;
  }

  /// this += s * x
  BasicField& axpy(T s, const BasicField& x) {
    detail::require_same_grid(spec_, x.spec_);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += s * x.values_[i];
    return *this;
  }

  friend BasicField operator+(BasicField a, const BasicField& b) { return a += b; }
  friend BasicField operator-(BasicField a, const BasicField& b) { return a -= b; }
  friend BasicField operator*(BasicField a, const BasicField& b) { return a *= b; }
  friend BasicField operator*(T s, BasicField a) { return a *= s; }
  friend BasicField operator*(BasicField a, T s) { return a *= s; }
  friend BasicField operator+(BasicField a, T s) { return a += s; }
  friend BasicField operator-(BasicField a, T s) { return a -= s; }
  friend BasicField operator-(BasicField a) { return a *= T(-1); }

 private:
  GridSpec spec_;
  Storage values_;
};

using ScalarField = BasicField<double>;
using ComplexField = BasicField<Complex>;

inline ComplexField to_complex(const ScalarField& u) {
  ComplexField out(u.spec());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i];
  return out;
}

inline ScalarField real_part(const ComplexField& u) {
  ScalarField out(u.spec());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i].real();
  return out;
}

inline ScalarField exponential(const ScalarField& u) {
  return u.map([](double v) { return std::exp(v); });
}

template <class T>
double sup_norm(const BasicField<T>& u) {
  double m = 0.0;
  for (const auto& v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

/// Half the oscillation of u: the sup-norm distance from u to the nearest
/// constant.
inline double distance_to_constant(const ScalarField& u) {
  auto [lo, hi] = std::minmax_element(u.values().begin(), u.values().end());
  return 0.5 * (*hi - *lo);
}

/// Compensated (Neumaier) sum of term(0..count-1) in index order; bit-stable
/// across runs.
template <class Term>
double compensated_sum(std::size_t count, Term&& term) {
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double v = term(i);
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

/// Discrete integral sum(u * w) / N^(2n). With w the volume density this is
/// the integral against omega^n / n!; the trapezoid rule is spectrally exact
/// on the torus.
inline double integrate(const ScalarField& u, const ScalarField& w) {
  detail::require_same_grid(u.spec(), w.spec());
  return compensated_sum(u.size(), [&](std::size_t i) { return u[i] * w[i]; }) /
         static_cast<double>(u.size());
}

inline double grid_mean(const ScalarField& u) {
  return compensated_sum(u.size(), [&](std::size_t i) { return u[i]; }) /
         static_cast<double>(u.size());
}

inline double weighted_mean(const ScalarField& u, const ScalarField& w) {
  return integrate(u, w) / grid_mean(w);
}

/// sqrt(integral of u^2 against w).
inline double weighted_l2(const ScalarField& u, const ScalarField& w) {
  detail::require_same_grid(u.spec(), w.spec());
  return std::sqrt(
      compensated_sum(u.size(), [&](std::size_t i) { return u[i] * u[i] * w[i]; }) /
      static_cast<double>(u.size()));
}

/// Wavenumber of grid index i in the symmetric range [-N/2, N/2).
inline int wavenumber(int i, int N) noexcept { return i < N / 2 ? i : i - N; }

/// Calls f(point, k) for every Fourier mode, where k holds the 2n
/// wavenumbers in axis order.
template <class F>
void for_each_mode(const GridSpec& spec, F&& f) {
  const int axes = spec.axes();
  const int N = spec.N();
  // Only the axes that roll over get a new wavenumber.
  std::array<int, 16> idx{};
  std::array<int, 16> k{};
  const std::span<const int> ks(k.data(), static_cast<std::size_t>(axes));
  for (std::size_t p = 0; p < spec.size(); ++p) {
    f(p, ks);
    for (int a = axes - 1; a >= 0; --a) {
      if (++idx[a] < N) {
        k[a] = wavenumber(idx[a], N);
        break;
      }
      idx[a] = 0;
      k[a] = 0;
    }
  }
}

namespace symbol {

constexpr double pi = std::numbers::pi;

inline int drop_nyquist(int k, int N) noexcept { return k == -N / 2 ? 0 : k; }

/// d/dz^j
inline Complex dz(std::span<const int> k, int j, int N) noexcept {
  const double kx = drop_nyquist(k[2 * j], N);
  const double ky = drop_nyquist(k[2 * j + 1], N);
  return {pi * ky, pi * kx};
}

/// d/dzbar^j
inline Complex dzbar(std::span<const int> k, int j, int N) noexcept {
  const double kx = drop_nyquist(k[2 * j], N);
  const double ky = drop_nyquist(k[2 * j + 1], N);
  return {-pi * ky, pi * kx};
}

/// d/dz^i d/dzbar^j. Even in k, so the operator equals its transpose.
inline Complex dz_dzbar(std::span<const int> k, int i, int j, int N) noexcept {
  if (i == j) {
    const double kx = k[2 * i];
    const double ky = k[2 * i + 1];
    return {-pi * pi * (kx * kx + ky * ky), 0.0};
  }
  return dz(k, i, N) * dzbar(k, j, N);
}

/// Flat complex Laplacian sum_j d/dz^j d/dzbar^j = 1/4 sum (d_xx + d_yy).
inline double flat_box(std::span<const int> k, int n) noexcept {
  double s = 0.0;
  for (int a = 0; a < 2 * n; ++a) s += static_cast<double>(k[a]) * k[a];
  return -pi * pi * s;
}

}  // namespace symbol

namespace fft {

inline void forward(ComplexField& u) {
  transform(u.spec().axes(), u.spec().N(), u.data(), Direction::forward);
}

/// Normalized inverse: inverse(forward(u)) == u.
inline void inverse(ComplexField& u) {
  transform(u.spec().axes(), u.spec().N(), u.data(), Direction::inverse);
  u *= Complex(1.0 / static_cast<double>(u.size()), 0.0);
}

}  // namespace fft

/// Forward transform of u (unnormalized).
inline ComplexField spectrum(const ComplexField& u) {
  ComplexField out = u;
  fft::forward(out);
  return out;
}

inline ComplexField spectrum(const ScalarField& u) {
  ComplexField out = to_complex(u);
  fft::forward(out);
  return out;
}

/// out = inverse transform of symbol(k) * uhat. `out` must not alias uhat.
template <class Symbol>
void apply_symbol_into(const ComplexField& uhat, ComplexField& out, Symbol&& sym) {
  for_each_mode(uhat.spec(), [&](std::size_t p, std::span<const int> k) {
    out[p] = uhat[p] * sym(k);
  });
  fft::inverse(out);
}

template <class Symbol>
ComplexField apply_symbol(const ComplexField& uhat, Symbol&& sym) {
  ComplexField out(uhat.spec());
  apply_symbol_into(uhat, out, std::forward<Symbol>(sym));
  return out;
}

template <class Field>
ComplexField partial_z(const Field& u, int j) {
  const int N = u.spec().N();
  return apply_symbol(spectrum(u), [&](std::span<const int> k) {
    return symbol::dz(k, j, N);
  });
}

template <class Field>
ComplexField partial_zbar(const Field& u, int j) {
  const int N = u.spec().N();
  return apply_symbol(spectrum(u), [&](std::span<const int> k) {
    return symbol::dzbar(k, j, N);
  });
}

template <class Field>
ComplexField partial_z_zbar(const Field& u, int i, int j) {
  const int N = u.spec().N();
  return apply_symbol(spectrum(u), [&](std::span<const int> k) {
    return symbol::dz_dzbar(k, i, j, N);
  });
}

/// Inverse of the flat complex Laplacian with the zero mode pinned to 0.
inline ScalarField flat_box_inverse(const ScalarField& u) {
  const int n = u.spec().n();
  return real_part(apply_symbol(spectrum(u), [&](std::span<const int> k) {
    const double s = symbol::flat_box(k, n);
    return s == 0.0 ? Complex{} : Complex{1.0 / s, 0.0};
  }));
}

/// Deterministic smooth real field: random Fourier coefficients on modes
/// with every |k_a| <= max_mode, zero mean, rescaled so sup|u| = amplitude.
inline ScalarField random_band_limited(const GridSpec& spec, std::uint64_t seed,
                                       int max_mode, double amplitude) {
  if (max_mode < 1 || max_mode >= spec.N() / 2) {
    throw Error(ErrorKind::AliasedMode,
                "max_mode must lie in [1, N/2), got " + std::to_string(max_mode));
  }
  if (amplitude == 0.0) return ScalarField(spec);

  std::mt19937_64 rng(seed);
  auto uniform = [&rng] {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  };
  ComplexField coeffs(spec);
  for_each_mode(spec, [&](std::size_t p, std::span<const int> k) {
    int k2 = 0;
    for (int kk : k) {
      if (std::abs(kk) > max_mode) return;
      k2 += kk * kk;
    }
    if (k2 == 0) return;
    const double re = uniform();
    const double im = uniform();
    coeffs[p] = Complex{re, im} / (1.0 + k2);
  });
  fft::inverse(coeffs);
  ScalarField u = real_part(coeffs);
  u -= grid_mean(u);
  u *= amplitude / sup_norm(u);
  return u;
}

}  // namespace chern_extremal
