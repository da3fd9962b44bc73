#pragma once

// n-conformal extremal metric of a conformal class.
//
// Pipeline: Gauduchon representative omega_G = e^{f_G} omega_g, then the
// Poisson problem box_G f = (s_G - C) / n with C the dV_G-average of s_G.
// omega_E = e^{f_E} omega_g with f_E = f_G + f_poisson + (volume gauge) has
// s_E = e^{-(f_poisson + gauge)} C, hence box_E*(s_E |s_E|^{n-2}) = 0.

#include <cmath>
#include <cstdint>
#include <string>

#include "chern_extremal/calabi.hpp"
#include "chern_extremal/curvature.hpp"
#include "chern_extremal/errors.hpp"
#include "chern_extremal/gauduchon.hpp"
#include "chern_extremal/krylov.hpp"
#include "chern_extremal/metric.hpp"
#include "chern_extremal/operators.hpp"

namespace chern_extremal {

struct ExtremalTolerances {
  /// mean_scalar refuses metrics whose Gauduchon defect exceeds this.
  double gauduchon_defect = 1e-7;
  /// End-to-end Euler-Lagrange residual beyond which the result is rejected.
  double el_reject = 1e-5;
};

struct ExtremalResult {
  /// f_E with omega_E = e^{f_E} omega_g.
  ScalarField factor;
  /// Solution of box_G f = psi with zero dV_G-mean.
  ScalarField poisson;
  /// Constant added so vol(omega_E) = vol(omega_g).
  double volume_shift = 0.0;
  /// dV_G-average of s_G.
  double mean_curvature = 0.0;
  GauduchonResult gauduchon;
  double el_residual = 0.0;
  /// ||box_G f - psi|| / ||psi||, recomputed after the solve.
  double poisson_residual = 0.0;
  SolveReport report;
};

/// dV-average of the Chern scalar curvature of a Gauduchon metric.
inline double mean_scalar(const HermitianMetricField& gG, double defect_tol = 1e-7) {
  const double defect = verify_gauduchon(gG);
  if (!(defect < defect_tol)) {
    throw Error(ErrorKind::NotGauduchon, "Gauduchon defect " + std::to_string(defect) +
                                             " exceeds " + std::to_string(defect_tol));
  }
  return weighted_mean(chern_scalar(gG), volume_density(gG));
}

/// Total scalar curvature integral of s omega^n (not omega^n / n!).
inline double total_scalar(const HermitianMetricField& g) {
  double factorial = 1.0;
  for (int k = 2; k <= g.n(); ++k) factorial *= k;
  return factorial * integrate(chern_scalar(g), volume_density(g));
}

inline ExtremalResult extremal_factor(const HermitianMetricField& g, const KrylovConfig& cfg,
                                      const ExtremalTolerances& tols = {}) {
  const double n = g.n();
  GauduchonResult gauduchon = gauduchon_factor(g, cfg);
  const HermitianMetricField gG = g.conformal(gauduchon.factor);

  const double C = mean_scalar(gG, tols.gauduchon_defect);
  const ScalarField sG = chern_scalar(gG);
  const ScalarField psi = (1.0 / n) * (sG - C);

  const LinearMap A = box_map(gG, /*constant_cokernel=*/true);
  auto [fp, report] = krylov_solve(A, psi, cfg, /*kernel_projection=*/true);
  const double psi_norm = A.norm(psi);

  const ScalarField enf = fp.map([n](double x) { return std::exp(n * x); });
  const double shift = std::log(grid_mean(A.weight) / integrate(enf, A.weight)) / n;
  ScalarField factor = gauduchon.factor + fp;
  factor += shift;

  ExtremalResult result{std::move(factor), std::move(fp), shift, C, std::move(gauduchon)};
  result.poisson_residual =
      psi_norm == 0.0 ? 0.0 : A.norm(box(gG, result.poisson) - psi) / psi_norm;

  const HermitianMetricField gE = g.conformal(result.factor);
  result.el_residual = el_residual(gE, n).norm;

  result.report = std::move(report);
  result.report.method = "gauduchon+" + result.report.method;
  result.report.add_constant("mean_curvature", result.mean_curvature);
  result.report.add_constant("gauduchon_residual", result.gauduchon.residual);
  result.report.add_constant("poisson_residual", result.poisson_residual);
  result.report.add_constant("el_residual", result.el_residual);
  result.report.tolerances.push_back(
      {"gauduchon_defect", tols.gauduchon_defect, "ExtremalTolerances"});
  result.report.tolerances.push_back({"el_reject", tols.el_reject, "ExtremalTolerances"});

  if (!(result.el_residual <= tols.el_reject)) {
    throw Error(ErrorKind::ResidualTooLarge,
                "extremal Euler-Lagrange residual " + std::to_string(result.el_residual) +
                    " exceeds " + std::to_string(tols.el_reject));
  }
  return result;
}

enum class CurvatureSign { Positive, Negative, Zero };

inline std::string_view to_string(CurvatureSign s) {
  switch (s) {
    case CurvatureSign::Positive: return "Positive";
    case CurvatureSign::Negative: return "Negative";
    case CurvatureSign::Zero: return "Zero";
  }
  return "?";
}

struct SignClassification {
  CurvatureSign sign = CurvatureSign::Zero;
  /// Total scalar curvature of the Gauduchon representative.
  double total = 0.0;
  /// n! vol(omega_G), the scale the Zero threshold is relative to.
  double scale = 0.0;
  /// sup |s_E| of the realized extremal metric.
  double extremal_sup = 0.0;
  /// s_E has the classified sign pointwise (or sup |s_E| <= tol for Zero).
  bool consistent = false;
};

/// Sign of the Gauduchon degree, which fixes the sign of s_E since
/// s_E = e^{-f} total / integral omega_G^n.
inline SignClassification classify_sign(const HermitianMetricField& g,
                                        const ExtremalResult& extremal, double tol = 1e-6) {
  const HermitianMetricField gG = g.conformal(extremal.gauduchon.factor);
  double factorial = 1.0;
  for (int k = 2; k <= g.n(); ++k) factorial *= k;

  SignClassification c;
  c.total = total_scalar(gG);
  c.scale = factorial * volume(gG);
  if (std::abs(c.total) <= tol * c.scale) {
    c.sign = CurvatureSign::Zero;
  } else {
    c.sign = c.total > 0 ? CurvatureSign::Positive : CurvatureSign::Negative;
  }
  const ScalarField sE = chern_scalar(g.conformal(extremal.factor));
  c.extremal_sup = sup_norm(sE);
  switch (c.sign) {
    case CurvatureSign::Zero: c.consistent = c.extremal_sup <= tol; break;
    case CurvatureSign::Positive:
      c.consistent = std::all_of(sE.values().begin(), sE.values().end(),
                                 [](double v) { return v > 0; });
      break;
    case CurvatureSign::Negative:
      c.consistent = std::all_of(sE.values().begin(), sE.values().end(),
                                 [](double v) { return v < 0; });
      break;
  }
  return c;
}

inline SignClassification classify_sign(const HermitianMetricField& g, const KrylovConfig& cfg,
                                        double tol = 1e-6) {
  return classify_sign(g, extremal_factor(g, cfg), tol);
}

}  // namespace chern_extremal
