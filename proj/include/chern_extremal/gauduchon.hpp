#pragma once

#include <cmath>

#include "chern_extremal/errors.hpp"
#include "chern_extremal/krylov.hpp"
#include "chern_extremal/metric.hpp"
#include "chern_extremal/operators.hpp"

namespace chern_extremal {

struct GauduchonResult {
  /// f_G with omega_G = e^{f_G} omega_g, normalized to preserve total volume.
  ScalarField factor;
  /// ||box_g*(e^{(n-1) f_G})|| / ||e^{(n-1) f_G}||.
  double residual = 0.0;
  SolveReport report;
};

/// Gauduchon defect ||box*(1)||: the weighted L2 norm of the torsion scalar.
inline double verify_gauduchon(const HermitianMetricField& g) {
  const ScalarField w = volume_density(g);
  return weighted_l2(box_adjoint(g, ScalarField(g.spec(), 1.0), w), w);
}

/// Conformal factor of the Gauduchon representative of [g].
///
/// box_{e^f g}*(1) = e^{-nf} box_g*(e^{(n-1)f}), so e^f g is Gauduchon iff
/// e^{(n-1)f} spans the kernel of box_g*.
inline GauduchonResult gauduchon_factor(const HermitianMetricField& g,
                                        const KrylovConfig& cfg) {
  const LinearMap A = box_adjoint_map(g);
  auto [v, report] = null_vector(A, cfg);

  const double n = g.n();
  ScalarField f = v.map([n](double x) { return std::log(x) / (n - 1.0); });
  // Equal total volume: integral of e^{n f} w equals integral of w.
  const ScalarField enf = f.map([n](double x) { return std::exp(n * x); });
  const double shift = std::log(grid_mean(A.weight) / integrate(enf, A.weight)) / n;
  f += shift;

  const ScalarField e = f.map([n](double x) { return std::exp((n - 1.0) * x); });
  for (std::size_t p = 0; p < e.size(); ++p) {
    if (!(e[p] > 0.0)) {
      throw Error(ErrorKind::NonPositiveKernel, "Gauduchon weight not positive");
    }
  }
  GauduchonResult result{std::move(f), 0.0, std::move(report)};
  result.residual = A.norm(A.apply(e)) / A.norm(e);
  result.report.add_constant("gauduchon_residual", result.residual);
  return result;
}

}  // namespace chern_extremal
