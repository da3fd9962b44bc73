#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chern_extremal/errors.hpp"
#include "chern_extremal/grid.hpp"

namespace chern_extremal {

struct ToleranceRecord {
  std::string name;
  double value;
  std::string source;
};

struct SolveReport {
  std::string method;
  int iterations = 0;
  int restarts = 0;
  double initial_residual = 0.0;
  /// Final ||A x - b|| / ||b|| (weighted norm of the operator's inner product).
  double relative_residual = 0.0;
  bool converged = false;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<ToleranceRecord> tolerances;

  void add_constant(std::string name, double value) {
    constants.emplace_back(std::move(name), value);
  }
  std::optional<double> constant(const std::string& name) const {
    for (const auto& [k, v] : constants)
      if (k == name) return v;
    return std::nullopt;
  }
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, SolveReport report)
      : Error(ErrorKind::NonConvergence, what), report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

/// Apply-only linear operator on real fields with a weighted inner product
/// <u, v> = integrate(u * v, weight).
struct LinearMap {
  using Apply = std::function<ScalarField(const ScalarField&)>;

  std::string name;
  Apply apply;
  ScalarField weight;
  /// Right preconditioner (approximate inverse); identity when empty.
  Apply preconditioner;
  /// The range is orthogonal to the constants, so a right-hand side must have
  /// zero weighted mean.
  bool constant_cokernel = false;

  double inner(const ScalarField& u, const ScalarField& v) const {
    detail::require_same_grid(u.spec(), v.spec());
    return compensated_sum(u.size(), [&](std::size_t i) { return u[i] * v[i] * weight[i]; }) /
           static_cast<double>(u.size());
  }
  double norm(const ScalarField& u) const { return weighted_l2(u, weight); }

  /// u minus its weighted mean.
  ScalarField project_mean_zero(ScalarField u) const {
    u -= weighted_mean(u, weight);
    return u;
  }
};

struct KrylovConfig {
  double tol = 1e-10;
  int max_iter = 1000;
  int restart = 20;
  /// When set, every solve starts from a random band-limited field drawn
  /// with this seed instead of zero.
  std::optional<std::uint64_t> random_start_seed;

  static KrylovConfig for_grid(const GridSpec& spec) {
    KrylovConfig cfg;
    cfg.max_iter = 10 * spec.N() * spec.N();
    return cfg;
  }
};

namespace detail {

inline ScalarField initial_guess(const GridSpec& spec, const KrylovConfig& cfg) {
  if (!cfg.random_start_seed) return ScalarField(spec);
  return random_band_limited(spec, *cfg.random_start_seed, std::min(3, spec.N() / 2 - 1),
                             1.0);
}

/// Right-preconditioned restarted GMRES for op(x) = b, using modified
/// Gram-Schmidt with one reorthogonalization pass. `inner` defines the
/// norm being minimized.
template <class Op, class Precond, class Inner>
SolveReport gmres(Op&& op, Precond&& precond, Inner&& inner, const ScalarField& b,
                  ScalarField& x, const KrylovConfig& cfg) {
  SolveReport report;
  report.method = "gmres(" + std::to_string(cfg.restart) + ")";
  const auto norm = [&](const ScalarField& u) { return std::sqrt(std::max(0.0, inner(u, u))); };

  const double bnorm = norm(b);
  if (bnorm == 0.0) {
    x = ScalarField(b.spec());
    report.converged = true;
    return report;
  }
  const int m = std::max(1, cfg.restart);
  const double target = cfg.tol * bnorm;

  ScalarField r = b - op(x);
  double beta = norm(r);
  report.initial_residual = beta / bnorm;

  std::vector<ScalarField> V;
  V.reserve(m + 1);
  while (true) {
    if (beta <= target) {
      report.converged = true;
      break;
    }
    if (report.iterations >= cfg.max_iter) break;

    V.clear();
    V.push_back((1.0 / beta) * r);
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m && report.iterations < cfg.max_iter; ++k) {
      ++report.iterations;
      ScalarField w = op(precond(V[k]));
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= k; ++i) {
          const double h = inner(w, V[i]);
          H[i][k] += h;
          w.axpy(-h, V[i]);
        }
      }
      H[k + 1][k] = norm(w);
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H[i][k] + sn[i] * H[i + 1][k];
        H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
        H[i][k] = t;
      }
      const double denom = std::hypot(H[k][k], H[k + 1][k]);
      cs[k] = denom == 0.0 ? 1.0 : H[k][k] / denom;
      sn[k] = denom == 0.0 ? 0.0 : H[k + 1][k] / denom;
      H[k][k] = denom;
      const double hk1 = H[k + 1][k];
      H[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];

      const bool breakdown = hk1 <= 1e-300;
      if (!breakdown) V.push_back((1.0 / hk1) * w);
      if (std::abs(g[k + 1]) <= target || breakdown) {
        ++k;
        break;
      }
    }

    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
      y[i] = H[i][i] == 0.0 ? 0.0 : s / H[i][i];
    }
    ScalarField update(b.spec());
    for (int i = 0; i < k; ++i) update.axpy(y[i], V[i]);
    x += precond(update);

    r = b - op(x);
    const double new_beta = norm(r);
    ++report.restarts;
    const bool stagnated = new_beta >= beta * (1.0 - 1e-12);
    beta = new_beta;
    if (stagnated) break;
  }
  report.relative_residual = beta / bnorm;
  report.converged = beta <= target;
  return report;
}

}  // namespace detail

/// Solve A x = b with right-preconditioned GMRES.
///
/// With `kernel_projection` the problem is posed on the weighted mean-zero
/// subspace: inputs and outputs of every application are projected, and the
/// returned x has zero weighted mean. If A declares constants in its
/// cokernel, b is first checked for compatibility.
inline std::pair<ScalarField, SolveReport> krylov_solve(const LinearMap& A,
                                                        const ScalarField& b,
                                                        const KrylovConfig& cfg,
                                                        bool kernel_projection) {
  if (!(cfg.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  detail::require_same_grid(A.weight.spec(), b.spec());

  ScalarField rhs = b;
  if (A.constant_cokernel) {
    const double mean = weighted_mean(b, A.weight);
    const double rms = A.norm(b) / std::sqrt(grid_mean(A.weight));
    if (std::abs(mean) > 1e-8 * rms) {
      throw Error(ErrorKind::IncompatibleRHS,
                  A.name + ": right-hand side has weighted mean " + std::to_string(mean) +
                      " (rms " + std::to_string(rms) + ")");
    }
    rhs = A.project_mean_zero(std::move(rhs));
  }

  auto op = [&](const ScalarField& u) {
    if (!kernel_projection) return A.apply(u);
    return A.project_mean_zero(A.apply(A.project_mean_zero(u)));
  };
  auto precond = [&](const ScalarField& u) {
    ScalarField z = A.preconditioner ? A.preconditioner(u) : u;
    return kernel_projection ? A.project_mean_zero(std::move(z)) : z;
  };
  auto inner = [&](const ScalarField& u, const ScalarField& v) { return A.inner(u, v); };

  ScalarField x = detail::initial_guess(b.spec(), cfg);
  if (kernel_projection) x = A.project_mean_zero(std::move(x));
  SolveReport report = detail::gmres(op, precond, inner, rhs, x, cfg);
  report.tolerances.push_back({"krylov.tol", cfg.tol, "KrylovConfig"});
  if (kernel_projection) x = A.project_mean_zero(std::move(x));
  if (!report.converged) {
    throw NonConvergence(A.name + ": relative residual " +
                             std::to_string(report.relative_residual) + " after " +
                             std::to_string(report.iterations) + " iterations",
                         report);
  }
  return {std::move(x), std::move(report)};
}

/// Positive null vector of an operator with a one-dimensional kernel.
///
/// Deflated solve: writing v = 1 + w with w of zero weighted mean, the
/// kernel equation becomes A w = -A(1), a consistent system whose solution
/// is unique on the mean-zero subspace whenever the kernel vector has
/// nonzero mean. The result is normalized to unit weighted norm with
/// positive grid mean.
inline std::pair<ScalarField, SolveReport> null_vector(const LinearMap& A,
                                                       const KrylovConfig& cfg) {
  const GridSpec& spec = A.weight.spec();
  const ScalarField one(spec, 1.0);
  const ScalarField a1 = A.apply(one);

  ScalarField v = one;
  SolveReport report;
  report.method = "deflated gmres(" + std::to_string(cfg.restart) + ")";
  if (A.norm(a1) == 0.0) {
    report.converged = true;
  } else {
    auto op = [&](const ScalarField& u) { return A.apply(A.project_mean_zero(u)); };
    auto precond = [&](const ScalarField& u) {
      return A.project_mean_zero(A.preconditioner ? A.preconditioner(u) : u);
    };
    auto inner = [&](const ScalarField& u, const ScalarField& w) { return A.inner(u, w); };
    ScalarField w = A.project_mean_zero(detail::initial_guess(spec, cfg));
    report = detail::gmres(op, precond, inner, -1.0 * a1, w, cfg);
    report.method = "deflated " + report.method;
    if (!report.converged) {
      throw NonConvergence(A.name + ": null vector residual " +
                               std::to_string(report.relative_residual),
                           report);
    }
    v += A.project_mean_zero(w);
  }

  if (grid_mean(v) < 0.0) v *= -1.0;
  v *= 1.0 / A.norm(v);
  report.tolerances.push_back({"krylov.tol", cfg.tol, "KrylovConfig"});
  report.add_constant("null_residual", A.norm(A.apply(v)) / A.norm(v));

  double lo = v[0];
  for (double x : v.values()) lo = std::min(lo, x);
  if (!(lo > 0.0)) {
    throw Error(ErrorKind::NonPositiveKernel,
                A.name + ": kernel vector changes sign (min " + std::to_string(lo) +
                    "); grid too coarse or metric invalid");
  }
  return {std::move(v), std::move(report)};
}

}  // namespace chern_extremal
