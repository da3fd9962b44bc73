#pragma once

// The work behind each CLI command, independent of argument parsing and
// file layout so it can be driven from tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chern_extremal/calabi.hpp"
#include "chern_extremal/curvature.hpp"
#include "chern_extremal/extremal.hpp"
#include "chern_extremal/gauduchon.hpp"
#include "chern_extremal/operators.hpp"
#include "chern_extremal/report.hpp"
#include "chern_extremal/scenario.hpp"

namespace chern_extremal {

struct CommandResult {
  Json results = Json::object();
  std::vector<Check> checks;
  std::vector<std::pair<std::string, ScalarField>> fields;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
};

using Progress = std::function<void(const std::string&)>;

/// Independent seed for the k-th random field drawn from a scenario seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Shortest decimal rendering, for check names ("2", "3.5", "0.1").
inline std::string compact(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline KrylovConfig solver_config(const Scenario& s, const GridSpec& grid) {
  KrylovConfig cfg = KrylovConfig::for_grid(grid);
  cfg.tol = s.tolerances.krylov;
  return cfg;
}

/// Population standard deviation under the dV weight.
inline double weighted_std(const ScalarField& u, const ScalarField& w) {
  return weighted_l2(u - weighted_mean(u, w), w) / std::sqrt(grid_mean(w));
}

inline CommandResult run_solve(const Scenario& s, const Progress& progress = {}) {
  const GridSpec grid = s.grid();
  const Tolerances& tol = s.tolerances;
  if (progress) progress("realizing " + family_name(s.metric) + " metric on N=" +
                         std::to_string(grid.N()));
  const HermitianMetricField g = realize(s.metric, grid);
  if (progress) progress("solving for the Gauduchon factor and the Poisson problem");
  // Solver gates keep their defaults; --tol only tightens the reported checks.
  const ExtremalResult ext = extremal_factor(g, solver_config(s, grid));

  const HermitianMetricField gG = g.conformal(ext.gauduchon.factor);
  const HermitianMetricField gE = g.conformal(ext.factor);
  const ScalarField sG = chern_scalar(gG);
  const ScalarField sE = chern_scalar(gE);
  const ScalarField wG = volume_density(gG);
  const double n = g.n();
  const double cn = calabi_functional(gE, n);
  const double defect = verify_gauduchon(gG);
  const SignClassification sign = classify_sign(g, ext, tol.end_to_end);
  const double vol_g = volume(g), vol_E = volume(gE);
  // s_E e^{f_poisson + shift} = C pointwise.
  const ScalarField constancy = sE * exponential(ext.poisson + ext.volume_shift);
  const double constancy_std = weighted_std(constancy, wG);

  CommandResult r;
  r.checks.push_back(make_check("gauduchon_defect", "||box*(1)|| of the Gauduchon representative",
                                defect, tol.spectral));
  r.checks.push_back(make_check("poisson_residual", "||box_G f - psi|| / ||psi||",
                                ext.poisson_residual, tol.krylov));
  r.checks.push_back(make_check("extremal_residual", "||box_E*(s_E |s_E|^(n-2))||",
                                ext.el_residual, tol.end_to_end));
  r.checks.push_back(make_check("extremal_functional", "C_n of the extremal metric", cn,
                                tol.functional));
  r.checks.push_back(make_check("volume_preserved", "relative volume change of the extremal metric",
                                std::abs(vol_E - vol_g) / vol_g, tol.machine));
  r.checks.push_back(make_check("degree_zero",
                                "|total scalar curvature of omega_G| / (n! vol)",
                                std::abs(sign.total) / sign.scale, tol.end_to_end));
  r.checks.push_back(make_check("extremal_scalar_sign", "sup |s_E| for the Zero class",
                                sign.extremal_sup, tol.end_to_end));
  r.checks.push_back(make_check("extremal_scalar_constancy",
                                "std of s_E e^(f_E - f_G) / (1 + sup |s_G|)",
                                constancy_std / (1.0 + sup_norm(sG)), tol.end_to_end));
  if (const auto exact = analytic_extremal_factor(s.metric, grid)) {
    r.checks.push_back(make_check("analytic_factor", "oscillation of f_E minus the closed form",
                                  distance_to_constant(ext.factor - *exact), tol.end_to_end));
  }

  r.results = {{"mean_curvature", ext.mean_curvature},
               {"volume_shift", ext.volume_shift},
               {"gauduchon_residual", ext.gauduchon.residual},
               {"gauduchon_defect", defect},
               {"poisson_residual", ext.poisson_residual},
               {"extremal_residual", ext.el_residual},
               {"extremal_functional", cn},
               {"total_scalar", sign.total},
               {"sign", to_string(sign.sign)},
               {"sign_consistent", sign.consistent},
               {"sup_scalar_gauduchon", sup_norm(sG)},
               {"sup_scalar_extremal", sup_norm(sE)},
               {"factor_oscillation", distance_to_constant(ext.factor)},
               {"volume", vol_g},
               {"gauduchon_solve", to_json(ext.gauduchon.report)},
               {"poisson_solve", to_json(ext.report)}};
  r.fields.emplace_back("f_G", ext.gauduchon.factor);
  r.fields.emplace_back("f_E", ext.factor);
  r.fields.emplace_back("s_E", sE);
  return r;
}

inline CommandResult run_verify(const Scenario& s, const Progress& progress = {}) {
  const GridSpec grid = s.grid();
  const Tolerances& tol = s.tolerances;
  const double n = grid.n();
  const int modes = std::min(3, grid.N() / 2 - 1);
  const HermitianMetricField g = realize(s.metric, grid);
  const ScalarField w = volume_density(g);
  const ScalarField f = random_band_limited(grid, derive_seed(s.seed, 0), modes, 0.3);
  const ScalarField u = random_band_limited(grid, derive_seed(s.seed, 1), modes, 1.0);
  const ScalarField v = random_band_limited(grid, derive_seed(s.seed, 2), modes, 1.0);
  const ScalarField one(grid, 1.0);
  const HermitianMetricField gf = g.conformal(f);
  const ScalarField s_g = chern_scalar(g);

  CommandResult r;
  Json values = Json::object();
  auto add = [&](const char* name, const char* what, double value, double tolerance) {
    r.checks.push_back(make_check(name, what, value, tolerance));
    values[name] = value;
  };

  if (progress) progress("curvature identities");
  add("curvature_double_trace", "sup |s_g - double trace of the Chern curvature|",
      sup_norm(s_g - chern_curvature_oracle(g)), tol.spectral);
  add("conformal_scalar_curvature", "sup |s(e^f g) - e^-f (s_g - n box_g f)|",
      sup_norm(chern_scalar(gf) - conformal_scalar(s_g, f, g)), tol.spectral);

  if (progress) progress("adjoint identities");
  const ScalarField bu = box(g, u);
  const ScalarField bsu = box_adjoint(g, u, w);
  add("adjoint_duality", "|<box* u, v> - <u, box v>| / (|u| |v|)",
      std::abs(integrate(box_adjoint(g, v, w) * u, w) - integrate(v * bu, w)) /
          (weighted_l2(u, w) * weighted_l2(v, w)),
      tol.machine);
  add("adjoint_decomposition", "sup |box* u - (box*(1) u - Delta_d u - box u)|",
      sup_norm(bsu - (box_adjoint(g, one, w) * u - hodge_laplacian(g, u, w) - bu)),
      tol.spectral);
  add("conformal_box", "sup |box_{e^f g} u - e^-f box_g u|",
      sup_norm(box(gf, u) - exponential(-f) * bu), tol.spectral);
  add("conformal_adjoint", "sup |box*_{e^f g} u - e^-nf box*_g(e^((n-1) f) u)|",
      sup_norm(box_adjoint(gf, u) -
               exponential(-n * f) * box_adjoint(g, exponential((n - 1.0) * f) * u, w)),
      tol.spectral);

  if (progress) progress("Gauduchon representative");
  const GauduchonResult gr = gauduchon_factor(g, solver_config(s, grid));
  const HermitianMetricField gG = g.conformal(gr.factor);
  const ScalarField wG = volume_density(gG);
  add("gauduchon_defect", "||box*(1)|| of the Gauduchon representative", verify_gauduchon(gG),
      tol.spectral);
  const ScalarField phi = random_band_limited(grid, derive_seed(s.seed, 3), modes, 1.0);
  const double phi2 = integrate(phi * phi, wG);
  add("gauduchon_energy", "|<phi, box phi> + integral |d phi|^2| / |phi|^2 on omega_G",
      std::abs(integrate(phi * box(gG, phi), wG) + integrate(gradient_norm_sq(gG, phi), wG)) /
          phi2,
      tol.identity);

  if (progress) progress("power identities on omega_G");
  Json powers = Json::array();
  std::vector<double> ps{2.0};
  if (n != 2.0) ps.push_back(n);
  for (double p : ps) {
    const PowerIdentities pi = power_identities(gG, p);
    const std::string tag = "_p" + compact(p);
    r.checks.push_back(make_check("power_gauduchon_integral" + tag,
                                  "integral box(s|s|^(2p-2)) dV / scale",
                                  pi.gauduchon_residual(), tol.identity));
    r.checks.push_back(make_check("power_product_rule" + tag,
                                  "product-rule expansion of that integral, / scale",
                                  pi.product_rule_residual(), tol.identity));
    r.checks.push_back(make_check("power_adjoint_pairing" + tag,
                                  "integral |s|^p box*(s|s|^(p-2)) dV vs its expansion, / scale",
                                  pi.adjoint_pairing_residual(), tol.identity));
    powers.push_back(to_json(pi));
  }

  r.results = {{"identities", values},
               {"power_identities", powers},
               {"gauduchon_solve", to_json(gr.report)}};
  return r;
}

inline CommandResult run_calabi(const Scenario& s, const std::vector<double>& ps,
                                const std::vector<double>& ts, const Progress& progress = {}) {
  const GridSpec grid = s.grid();
  const Tolerances& tol = s.tolerances;
  const double n = grid.n();
  const HermitianMetricField g = realize(s.metric, grid);
  const ScalarField f =
      random_band_limited(grid, derive_seed(s.seed, 10), std::min(2, grid.N() / 2 - 1), 0.3);

  CommandResult r;
  Json entries = Json::array();
  for (double p : ps) {
    if (progress) progress("p = " + std::to_string(p));
    const double cp = calabi_functional(g, p);
    double scale_dev = 0.0;
    for (double lambda : {0.5, 2.0, 10.0}) {
      const double scaled = calabi_functional(g.scaled(lambda), p);
      scale_dev = std::max(scale_dev, std::abs(scaled - cp) / std::max(cp, 1e-12));
    }
    const std::string tag = "_p" + compact(p);
    r.checks.push_back(make_check("scale_invariance" + tag, "max relative |C_p(lambda g) - C_p(g)|",
                                  scale_dev, tol.machine));
    Json variations = Json::array();
    for (double t : ts) {
      const VariationReport vr = variation_at(g, f, p, t);
      r.checks.push_back(make_check("variation" + tag + "_t" + compact(t),
                                    "closed-form vs finite-difference dC_p/dt", vr.rel_error,
                                    tol.end_to_end));
      variations.push_back(to_json(vr));
    }
    Json entry = {{"p", p}, {"functional", cp}, {"scale_deviation", scale_dev},
                  {"variations", variations}};
    if (p >= 2.0) entry["euler_lagrange_residual"] = el_residual(g, p).norm;
    if (p == n) {
      Json second = Json::array();
      for (double t : ts) {
        const double sv = second_variation(g, f, t);
        r.checks.push_back(make_check("convexity_t" + compact(t),
                                      "negative part of d^2/dt^2 C_n", std::max(0.0, -sv),
                                      tol.machine));
        second.push_back({{"t", t}, {"value", sv}});
      }
      entry["second_variation"] = second;
    }
    entries.push_back(entry);
  }
  r.results = {{"direction_sup", sup_norm(f)}, {"exponents", entries}};
  return r;
}

/// Errors below this are treated as converged when checking monotonicity.
inline constexpr double sweep_noise_floor = 1e-10;

/// Every `step`-th point of a fine field along each axis.
inline ScalarField subsample(const ScalarField& fine, const GridSpec& coarse) {
  const GridSpec& fs = fine.spec();
  if (fs.n() != coarse.n() || fs.N() % coarse.N() != 0) {
    throw Error(ErrorKind::ShapeMismatch, "fine grid does not refine the coarse grid");
  }
  const std::size_t step = static_cast<std::size_t>(fs.N() / coarse.N());
  ScalarField out(coarse);
  for (std::size_t p = 0; p < coarse.size(); ++p) {
    std::size_t q = 0;
    for (int a = 0; a < coarse.axes(); ++a) q += coarse.index(p, a) * step * fs.stride(a);
    out[p] = fine[q];
  }
  return out;
}

inline CommandResult run_sweep(const Scenario& s, const Progress& progress = {}) {
  const std::vector<int>& sizes = s.task.sweep_N;
  std::vector<ScalarField> factors;
  std::vector<double> el;
  for (int N : sizes) {
    if (progress) progress("N = " + std::to_string(N));
    const GridSpec grid(s.n, N);
    const HermitianMetricField g = realize(s.metric, grid);
    ExtremalTolerances et;
    et.gauduchon_defect = s.tolerances.identity;
    ExtremalResult ext = extremal_factor(g, solver_config(s, grid), et);
    el.push_back(ext.el_residual);
    factors.push_back(std::move(ext.factor));
  }

  const bool analytic = analytic_extremal_factor(s.metric, GridSpec(s.n, sizes.front())).has_value();
  std::vector<double> errors;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const GridSpec grid(s.n, sizes[k]);
    if (analytic) {
      errors.push_back(
          distance_to_constant(factors[k] - *analytic_extremal_factor(s.metric, grid)));
    } else if (k + 1 < sizes.size()) {
      errors.push_back(distance_to_constant(factors[k] - subsample(factors.back(), grid)));
    }
  }

  CommandResult r;
  bool monotone = true;
  for (std::size_t k = 1; k < errors.size(); ++k) {
    monotone = monotone && (errors[k] <= errors[k - 1] || errors[k] <= sweep_noise_floor);
  }
  r.checks.push_back(make_check("monotone_error", "errors decrease with N (1 = violated)",
                                monotone ? 0.0 : 1.0, 0.0));
  Json rows = Json::array();
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    Json row = {{"N", sizes[k]}, {"extremal_residual", el[k]}};
    row["error"] = k < errors.size() ? Json(errors[k]) : Json(nullptr);
    rows.push_back(row);
  }
  r.results = {{"reference", analytic ? "closed form" : "finest grid"}, {"levels", rows}};
  if (errors.size() >= 2) {
    r.results["decay"] =
        errors.front() > 0.0 ? errors.back() / errors.front() : 0.0;
  }
  return r;
}

}  // namespace chern_extremal
