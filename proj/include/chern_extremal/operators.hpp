#pragma once

// Second-order operators on functions for a Hermitian metric on the torus.
//
// Every operator is a composition of pointwise multiplications and Fourier
// multipliers, and box_adjoint is assembled from the transposes of the
// pieces of box. Duality <box* u, v> = <u, box v> under the volume-weighted
// inner product therefore holds to roundoff, not to truncation order.

#include <algorithm>
#include <cmath>
#include <string>

#include "chern_extremal/errors.hpp"
#include "chern_extremal/grid.hpp"
#include "chern_extremal/krylov.hpp"
#include "chern_extremal/metric.hpp"

namespace chern_extremal {

namespace detail {

inline void check_real(const ComplexField& z, const char* what) {
  double re = 0.0, im = 0.0;
  for (const auto& v : z.values()) {
    re = std::max(re, std::abs(v.real()));
    im = std::max(im, std::abs(v.imag()));
  }
  if (im > 1e-10 * std::max(1.0, re)) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + ": imaginary residue " + std::to_string(im) +
                    " exceeds tolerance; Wirtinger convention mismatch");
  }
}

}  // namespace detail

/// g^{i jbar} d_i d_jbar u for a complex field (linear extension of box).
inline ComplexField trace_ddbar(const HermitianMetricField& g, const ComplexField& u) {
  detail::require_same_grid(g.spec(), u.spec());
  const int n = g.n();
  const int N = g.spec().N();
  const ComplexField uhat = spectrum(u);
  ComplexField out(u.spec());
  ComplexField t(u.spec());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      apply_symbol_into(uhat, t, [&](std::span<const int> k) {
        return symbol::dz_dzbar(k, i, j, N);
      });
      for (std::size_t p = 0; p < out.size(); ++p) out[p] += g.cometric(p)[i * n + j] * t[p];
    }
  }
  return out;
}

/// Complex Laplacian tr_omega(sqrt(-1) d dbar u) = g^{i jbar} d_i d_jbar u.
///
/// For real u the (j, i) term is the conjugate of the (i, j) term, so only
/// i <= j is transformed; the real diagonal terms go two per transform.
inline ScalarField box(const HermitianMetricField& g, const ScalarField& u) {
  detail::require_same_grid(g.spec(), u.spec());
  const int n = g.n();
  const int N = g.spec().N();
  const ComplexField uhat = spectrum(u);
  ScalarField out(u.spec());
  ComplexField t(u.spec());
  for (int i = 0; i < n; i += 2) {
    const int k2 = i + 1 < n ? i + 1 : -1;
    apply_symbol_into(uhat, t, [&](std::span<const int> k) {
      Complex s = symbol::dz_dzbar(k, i, i, N);
      if (k2 >= 0) s += Complex(0.0, 1.0) * symbol::dz_dzbar(k, k2, k2, N);
      return s;
    });
    for (std::size_t p = 0; p < out.size(); ++p) {
      const auto G = g.cometric(p);
      out[p] += G[i * n + i].real() * t[p].real();
      if (k2 >= 0) out[p] += G[k2 * n + k2].real() * t[p].imag();
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      apply_symbol_into(uhat, t, [&](std::span<const int> k) {
        return symbol::dz_dzbar(k, i, j, N);
      });
      for (std::size_t p = 0; p < out.size(); ++p) {
        out[p] += 2.0 * (g.cometric(p)[i * n + j] * t[p]).real();
      }
    }
  }
  return out;
}

/// Exact discrete adjoint of box under <u, v> = integrate(u v, w), where w is
/// the volume density of g: box* u = w^{-1} d_i d_jbar (w g^{i jbar} u).
/// Complex inputs are not supported; the conjugate-pair reduction assumes u
/// real.
inline ScalarField box_adjoint(const HermitianMetricField& g, const ScalarField& u,
                               const ScalarField& w) {
  detail::require_same_grid(g.spec(), u.spec());
  const int n = g.n();
  const int N = g.spec().N();
  // The (j, i) term is the conjugate of the (i, j) term, as in box.
  ComplexField acc(u.spec());
  ComplexField a(u.spec());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double mult = i == j ? 1.0 : 2.0;
      for (std::size_t p = 0; p < a.size(); ++p) {
        a[p] = w[p] * u[p] * g.cometric(p)[i * n + j];
      }
      fft::forward(a);
      for_each_mode(u.spec(), [&](std::size_t p, std::span<const int> k) {
        acc[p] += mult * symbol::dz_dzbar(k, i, j, N) * a[p];
      });
    }
  }
  fft::inverse(acc);
  ScalarField out = real_part(acc);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] /= w[p];
  return out;
}

inline ScalarField box_adjoint(const HermitianMetricField& g, const ScalarField& u) {
  return box_adjoint(g, u, volume_density(g));
}

/// Torsion scalar sqrt(-1) dbar* d* omega = box*(1). Vanishes exactly for
/// Gauduchon metrics.
inline ScalarField torsion_scalar(const HermitianMetricField& g) {
  return box_adjoint(g, ScalarField(g.spec(), 1.0));
}

/// |du|-type pointwise norm g^{i jbar} d_i u d_jbar u for real u.
inline ScalarField gradient_norm_sq(const HermitianMetricField& g, const ScalarField& u) {
  const int n = g.n();
  const ComplexField uhat = spectrum(u);
  std::vector<ComplexField> du;
  for (int i = 0; i < n; ++i) {
    du.push_back(apply_symbol(uhat, [&](std::span<const int> k) {
      return symbol::dz(k, i, u.spec().N());
    }));
  }
  ScalarField out(u.spec());
  for (std::size_t p = 0; p < out.size(); ++p) {
    Complex s{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += g.cometric(p)[i * n + j] * du[i][p] * std::conj(du[j][p]);
    out[p] = s.real();
  }
  return out;
}

/// Hodge Laplacian d*d on functions in weak form: the unique operator with
/// <Delta_d u, v> = integral of 2 Re(g^{i jbar} d_i u d_jbar v) against the
/// volume density, i.e. Delta_d u = -(2/w) Re sum_j d_jbar(w g^{i jbar} d_i u).
/// On the flat metric Delta_d = -2 box.
inline ScalarField hodge_laplacian(const HermitianMetricField& g, const ScalarField& u,
                                   const ScalarField& w) {
  detail::require_same_grid(g.spec(), u.spec());
  const int n = g.n();
  const int N = g.spec().N();
  const ComplexField uhat = spectrum(u);
  std::vector<ComplexField> du;
  for (int i = 0; i < n; ++i) {
    du.push_back(apply_symbol(uhat, [&](std::span<const int> k) {
      return symbol::dz(k, i, N);
    }));
  }
  ComplexField acc(u.spec());
  ComplexField flux(u.spec());
  for (int j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < flux.size(); ++p) {
      Complex s{};
      for (int i = 0; i < n; ++i) s += g.cometric(p)[i * n + j] * du[i][p];
      flux[p] = w[p] * s;
    }
    fft::forward(flux);
    for_each_mode(u.spec(), [&](std::size_t p, std::span<const int> k) {
      acc[p] += symbol::dzbar(k, j, N) * flux[p];
    });
  }
  fft::inverse(acc);
  ScalarField out(u.spec());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = -2.0 * acc[p].real() / w[p];
  return out;
}

inline ScalarField hodge_laplacian(const HermitianMetricField& g, const ScalarField& u) {
  return hodge_laplacian(g, u, volume_density(g));
}

/// box as a LinearMap. `constant_cokernel` should be set when g is
/// Gauduchon, where the range of box is exactly the weighted mean-zero
/// functions.
inline LinearMap box_map(const HermitianMetricField& g, bool constant_cokernel = false) {
  LinearMap A{"box", [&g](const ScalarField& u) { return box(g, u); }, volume_density(g),
              flat_box_inverse, constant_cokernel};
  return A;
}

inline LinearMap box_adjoint_map(const HermitianMetricField& g) {
  ScalarField w = volume_density(g);
  LinearMap A{"box_adjoint", {}, w, flat_box_inverse, false};
  A.apply = [&g, w](const ScalarField& u) { return box_adjoint(g, u, w); };
  return A;
}

inline LinearMap hodge_map(const HermitianMetricField& g) {
  ScalarField w = volume_density(g);
  LinearMap A{"hodge_laplacian", {}, w, {}, true};
  A.apply = [&g, w](const ScalarField& u) { return hodge_laplacian(g, u, w); };
  A.preconditioner = [](const ScalarField& u) { return -0.5 * flat_box_inverse(u); };
  return A;
}

}  // namespace chern_extremal
