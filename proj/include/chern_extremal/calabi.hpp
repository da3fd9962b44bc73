#pragma once

// The p-Calabi functional
//   C_p(omega) = (integral |s|^p dV) (integral dV)^{-(n-p)/n},
// dV = omega^n / n!, its variations along conformal rays e^{tf} omega, and
// the residual of its Euler-Lagrange equation.

#include <cmath>
#include <string>

#include "chern_extremal/curvature.hpp"
#include "chern_extremal/errors.hpp"
#include "chern_extremal/gauduchon.hpp"
#include "chern_extremal/grid.hpp"
#include "chern_extremal/metric.hpp"
#include "chern_extremal/operators.hpp"

namespace chern_extremal {

/// s |s|^e, continuously extended by 0 at s = 0 (needed when e < 0).
inline double signed_pow(double s, double e) {
  return s == 0.0 ? 0.0 : s * std::pow(std::abs(s), e);
}

inline ScalarField signed_pow(const ScalarField& s, double e) {
  return s.map([e](double v) { return signed_pow(v, e); });
}

inline ScalarField abs_pow(const ScalarField& s, double e) {
  return s.map([e](double v) { return std::pow(std::abs(v), e); });
}

inline void require_exponent_above_one(double p) {
  if (!(p > 1.0)) {
    throw Error(ErrorKind::UnsupportedExponent, "p must exceed 1, got " + std::to_string(p));
  }
}

inline double calabi_functional(const HermitianMetricField& g, double p) {
  require_exponent_above_one(p);
  const double n = g.n();
  const ScalarField s = chern_scalar(g);
  const ScalarField w = volume_density(g);
  return integrate(abs_pow(s, p), w) * std::pow(grid_mean(w), -(n - p) / n);
}

/// t -> C_p(e^{tf} g), evaluated by realizing the metric and recomputing its
/// curvature from scratch.
inline double calabi_along_ray(const HermitianMetricField& g, const ScalarField& f,
                               double p, double t) {
  return calabi_functional(g.conformal(t * f), p);
}

struct FirstVariation {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double total() const { return a1 + a2 + a3; }
};

/// Closed-form d/dt C_p(e^{tf} g) split into its three contributions:
///   a1 from the weight e^{(n-p)tf}, a2 from the curvature s - n t box f,
///   a3 from the volume normalization.
inline FirstVariation first_variation(const HermitianMetricField& g, const ScalarField& f,
                                      double p, double t) {
  require_exponent_above_one(p);
  const double n = g.n();
  const ScalarField s = chern_scalar(g);
  const ScalarField bf = box(g, f);
  const ScalarField w = volume_density(g);

  ScalarField st(f.spec()), weight_np(f.spec()), weight_n(f.spec());
  for (std::size_t i = 0; i < st.size(); ++i) {
    st[i] = s[i] - n * t * bf[i];
    weight_np[i] = std::exp((n - p) * t * f[i]);
    weight_n[i] = std::exp(n * t * f[i]);
  }
  const ScalarField st_p = abs_pow(st, p);
  const double vol_t = integrate(weight_n, w);
  const double norm = std::pow(vol_t, -(n - p) / n);

  FirstVariation v;
  v.a1 = (n - p) * integrate(f * weight_np * st_p, w) * norm;
  v.a2 = -n * p * integrate(weight_np * bf * signed_pow(st, p - 2.0), w) * norm;
  v.a3 = -(n - p) * integrate(weight_np * st_p, w) * integrate(f * weight_n, w) *
         std::pow(vol_t, -(n - p) / n - 1.0);
  return v;
}

/// Reduced first variation at t = 0: (integral F dV)(integral dV)^{-(n-p)/n}
/// with F = (n-p) f (|s|^p - avg|s|^p) - n p box(f) s |s|^{p-2}, where avg
/// is the dV-weighted mean.
inline double first_variation_at_zero(const HermitianMetricField& g, const ScalarField& f,
                                      double p) {
  require_exponent_above_one(p);
  const double n = g.n();
  const ScalarField s = chern_scalar(g);
  const ScalarField bf = box(g, f);
  const ScalarField w = volume_density(g);
  const ScalarField sp = abs_pow(s, p);
  const double avg = weighted_mean(sp, w);
  const ScalarField F = (n - p) * f * (sp - avg) - (n * p) * bf * signed_pow(s, p - 2.0);
  return integrate(F, w) * std::pow(grid_mean(w), -(n - p) / n);
}

struct VariationReport {
  double p = 0.0;
  double t = 0.0;
  double formula_value = 0.0;
  double fd_value = 0.0;
  double rel_error = 0.0;
  FirstVariation parts;
  double fd_step = 0.0;
  std::string fd_method;

  static constexpr double floor = 1e-12;
};

struct VariationOptions {
  double step = 1e-3;
  /// Richardson refinement is attempted only above this relative error.
  double refine_above = 1e-6;
};

/// Fourth-order central difference of t -> C_p(e^{tf} g) at t.
inline double fd_first_derivative(const HermitianMetricField& g, const ScalarField& f,
                                  double p, double t, double h) {
  const double cp2 = calabi_along_ray(g, f, p, t + 2 * h);
  const double cp1 = calabi_along_ray(g, f, p, t + h);
  const double cm1 = calabi_along_ray(g, f, p, t - h);
  const double cm2 = calabi_along_ray(g, f, p, t - 2 * h);
  return (-cp2 + 8.0 * cp1 - 8.0 * cm1 + cm2) / (12.0 * h);
}

inline VariationReport variation_at(const HermitianMetricField& g, const ScalarField& f,
                                    double p, double t, const VariationOptions& opt = {}) {
  VariationReport r;
  r.p = p;
  r.t = t;
  r.parts = first_variation(g, f, p, t);
  r.formula_value = t == 0.0 ? first_variation_at_zero(g, f, p) : r.parts.total();
  r.fd_step = opt.step;
  r.fd_method = "central-4";
  r.fd_value = fd_first_derivative(g, f, p, t, opt.step);
  auto rel = [&](double fd) {
    return std::abs(r.formula_value - fd) / std::max(std::abs(fd), VariationReport::floor);
  };
  r.rel_error = rel(r.fd_value);
  if (r.rel_error > opt.refine_above) {
    const double half = fd_first_derivative(g, f, p, t, 0.5 * opt.step);
    const double extrapolated = (16.0 * half - r.fd_value) / 15.0;
    if (rel(extrapolated) < r.rel_error) {
      r.fd_value = extrapolated;
      r.rel_error = rel(extrapolated);
      r.fd_method = "central-4+richardson";
    }
  }
  return r;
}

/// d^2/dt^2 C_n(e^{tf} g) = n^3 (n-1) integral (box f)^2 |s - n t box f|^{n-2} dV.
inline double second_variation(const HermitianMetricField& g, const ScalarField& f, double t) {
  const double n = g.n();
  const ScalarField s = chern_scalar(g);
  const ScalarField bf = box(g, f);
  const ScalarField w = volume_density(g);
  ScalarField integrand(f.spec());
  for (std::size_t i = 0; i < integrand.size(); ++i) {
    integrand[i] = bf[i] * bf[i] * std::pow(std::abs(s[i] - n * t * bf[i]), n - 2.0);
  }
  return n * n * n * (n - 1.0) * integrate(integrand, w);
}

struct ElResidual {
  ScalarField field;
  double norm;
};

/// R = box*(s|s|^{p-2}) - (n-p)/(np) (|s|^p - avg|s|^p), with its weighted L2
/// norm. Restricted to p >= 2 where s|s|^{p-2} is differentiable.
inline ElResidual el_residual(const HermitianMetricField& g, double p) {
  if (!(p >= 2.0)) {
    throw Error(ErrorKind::UnsupportedExponent,
                "Euler-Lagrange residual needs p >= 2, got " + std::to_string(p));
  }
  const double n = g.n();
  const ScalarField s = chern_scalar(g);
  const ScalarField w = volume_density(g);
  const ScalarField sp = abs_pow(s, p);
  const double avg = weighted_mean(sp, w);
  ScalarField R = box_adjoint(g, signed_pow(s, p - 2.0), w);
  R.axpy(-(n - p) / (n * p), sp - avg);
  const double norm = weighted_l2(R, w);
  return {std::move(R), norm};
}

/// Integral identities for powers of the curvature on a Gauduchon metric.
///
///   gauduchon_integral    I1 = integral box(s|s|^{2p-2}) dV        (zero)
///   product_rule          I2 = (2p-1) integral (|s|^{2p-2} box s
///                              + 2(p-1) s|s|^{2p-4} |ds|^2) dV    (= I1)
///   adjoint_pairing_lhs      = integral |s|^p box*(s|s|^{p-2}) dV
///   adjoint_pairing_rhs      = p integral (|s|^{2p-2} box s
///                              + (p-1) s|s|^{2p-4} |ds|^2) dV     (= lhs)
/// with |ds|^2 = g^{i jbar} d_i s d_jbar s. `scale` is the sum of the
/// magnitudes of the integrands, used to make tolerances relative.
struct PowerIdentities {
  double p = 0.0;
  double gauduchon_integral = 0.0;
  double product_rule = 0.0;
  double adjoint_pairing_lhs = 0.0;
  double adjoint_pairing_rhs = 0.0;
  /// (n-p)/(np) integral (|s|^p - avg|s|^p)^2 dV; equals adjoint_pairing_lhs
  /// only on p-extremal metrics, so it is reported, not checked.
  double extremal_pairing = 0.0;
  double scale = 1.0;
  double defect = 0.0;

  double gauduchon_residual() const { return std::abs(gauduchon_integral) / scale; }
  double product_rule_residual() const {
    return std::abs(product_rule - gauduchon_integral) / scale;
  }
  double adjoint_pairing_residual() const {
    return std::abs(adjoint_pairing_lhs - adjoint_pairing_rhs) / scale;
  }
};

inline PowerIdentities power_identities(const HermitianMetricField& g, double p,
                                        double gauduchon_tol = 1e-7) {
  if (!(p >= 2.0)) {
    throw Error(ErrorKind::UnsupportedExponent,
                "identities need p >= 2, got " + std::to_string(p));
  }
  PowerIdentities r;
  r.p = p;
  r.defect = verify_gauduchon(g);
  if (!(r.defect < gauduchon_tol)) {
    throw Error(ErrorKind::NotGauduchon,
                "Gauduchon defect " + std::to_string(r.defect) + " exceeds " +
                    std::to_string(gauduchon_tol));
  }
  const double n = g.n();
  const ScalarField s = chern_scalar(g);
  const ScalarField w = volume_density(g);
  const ScalarField bs = box(g, s);
  const ScalarField ds2 = gradient_norm_sq(g, s);

  const ScalarField s_2p2 = abs_pow(s, 2 * p - 2);
  const ScalarField s_2p4 = signed_pow(s, 2 * p - 4);
  const double term_box = integrate(s_2p2 * bs, w);
  const double term_grad = integrate(s_2p4 * ds2, w);

  r.gauduchon_integral = integrate(box(g, signed_pow(s, 2 * p - 2)), w);
  r.product_rule = (2 * p - 1) * (term_box + 2 * (p - 1) * term_grad);
  r.adjoint_pairing_lhs = integrate(abs_pow(s, p) * box_adjoint(g, signed_pow(s, p - 2), w), w);
  r.adjoint_pairing_rhs = p * (term_box + (p - 1) * term_grad);

  const ScalarField sp = abs_pow(s, p);
  const ScalarField dev = sp - weighted_mean(sp, w);
  r.extremal_pairing = (n - p) / (n * p) * integrate(dev * dev, w);

  const double mag_box = integrate(abs_pow(s, 2 * p - 2) * bs.map([](double v) { return std::abs(v); }), w);
  const double mag_grad = integrate(abs_pow(s, 2 * p - 3) * ds2, w);
  r.scale = std::max(1.0, (2 * p - 1) * (mag_box + 2 * (p - 1) * mag_grad));
  return r;
}

}  // namespace chern_extremal
