#pragma once

#include <cmath>
#include <vector>

#include "chern_extremal/grid.hpp"
#include "chern_extremal/metric.hpp"
#include "chern_extremal/operators.hpp"

namespace chern_extremal {

/// Chern scalar curvature s = -g^{i jbar} d_i d_jbar log det g.
inline ScalarField chern_scalar(const HermitianMetricField& g) {
  return -1.0 * box(g, g.log_det());
}

/// Chern scalar curvature as the full double trace g^{i jbar} g^{k lbar}
/// Theta_{i jbar k lbar} of the curvature tensor
///   Theta_{i jbar k lbar} = -d_i d_jbar g_{k lbar}
///                           + g^{p qbar} (d_i g_{k qbar}) (d_jbar g_{p lbar}).
/// Independent of the log-determinant path; O(n^6) work per point.
inline ScalarField chern_curvature_oracle(const HermitianMetricField& g) {
  const GridSpec& spec = g.spec();
  const int n = g.n();
  const int N = spec.N();
  const std::size_t nn = static_cast<std::size_t>(n) * n;

  ComplexField s(spec);
  // Second-derivative term: -g^{k lbar} (g^{i jbar} d_i d_jbar g_{k lbar}).
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const ComplexField t = trace_ddbar(g, g.component(k, l));
      for (std::size_t p = 0; p < spec.size(); ++p) s[p] -= g.cometric(p)[k * n + l] * t[p];
    }
  }

  // d[(i*n + k)*n + q] = d_i g_{k qbar}; d_jbar g_{p lbar} = conj(d_j g_{l pbar}).
  std::vector<ComplexField> d;
  d.reserve(nn * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      for (int q = 0; q < n; ++q) {
        d.push_back(apply_symbol(spectrum(g.component(k, q)), [&](std::span<const int> m) {
          return symbol::dz(m, i, N);
        }));
      }
    }
  }
  auto first = [&](int i, int k, int q, std::size_t p) { return d[(i * n + k) * n + q][p]; };

  for (std::size_t p = 0; p < spec.size(); ++p) {
    const auto G = g.cometric(p);
    Complex acc{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const Complex gij_gkl = G[i * n + j] * G[k * n + l];
            for (int pp = 0; pp < n; ++pp)
              for (int q = 0; q < n; ++q) {
                acc += gij_gkl * G[pp * n + q] * first(i, k, q, p) *
                       std::conj(first(j, l, pp, p));
              }
          }
    s[p] += acc;
  }
  detail::check_real(s, "chern_curvature_oracle");
  return real_part(s);
}

/// Curvature of e^f g from that of g: e^{-f} (s_g - n box_g f).
inline ScalarField conformal_scalar(const ScalarField& s_g, const ScalarField& f,
                                    const HermitianMetricField& g) {
  detail::require_same_grid(s_g.spec(), f.spec());
  const ScalarField bf = box(g, f);
  ScalarField out(f.spec());
  const double n = g.n();
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = std::exp(-f[p]) * (s_g[p] - n * bf[p]);
  return out;
}

}  // namespace chern_extremal
