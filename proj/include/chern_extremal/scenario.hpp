#pragma once

// Scenario files and the builtin metric families.
//
// A scenario is a YAML document:
//
//   name: nonkahler
//   n: 2
//   N: 32
//   seed: 7
//   metric:
//     family: perturbed_hermitian      # flat | conformal_flat | perturbed_hermitian | file
//     entries:                         # perturbed_hermitian: added to the identity
//       - {i: 1, j: 1, part: re, terms: [{mode: [0, 0, 1, 0], amplitude: 0.3}]}
//   task:
//     kind: verify                     # solve | verify | calabi | sweep
//   tolerances: {spectral: 1.0e-8}
//
// conformal_flat takes `phi: [terms]` and realizes e^phi * identity;
// `file` takes `path:` (relative to the scenario file) naming n^2 CEXF1
// records: for each i <= j in row order, Re g_{i jbar}, then Im g_{i jbar}
// when i < j. A term a cos(2 pi m.x + theta) has `mode` m over the axes
// (x1, y1, ..., xn, yn), `amplitude` a and optional `phase` theta.
// Component indices i, j are 1-based here and 0-based in the C++ API.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "chern_extremal/errors.hpp"
#include "chern_extremal/field_io.hpp"
#include "chern_extremal/grid.hpp"
#include "chern_extremal/metric.hpp"

namespace chern_extremal {

struct TrigTerm {
  std::vector<int> mode;
  double amplitude = 0.0;
  double phase = 0.0;
};

using TrigPolynomial = std::vector<TrigTerm>;

/// Sum of a cos(2 pi m.x + theta) sampled on the grid.
inline ScalarField evaluate(const TrigPolynomial& poly, const GridSpec& spec) {
  for (const auto& term : poly) {
    if (static_cast<int>(term.mode.size()) != spec.axes()) {
      throw Error(ErrorKind::InvalidArgument,
                  "trig mode has " + std::to_string(term.mode.size()) + " entries, grid has " +
                      std::to_string(spec.axes()) + " axes");
    }
    for (int m : term.mode) {
      if (std::abs(m) >= spec.N() / 2) {
        throw Error(ErrorKind::AliasedMode, "mode " + std::to_string(m) +
                                                " not below N/2 = " +
                                                std::to_string(spec.N() / 2));
      }
    }
  }
  ScalarField out(spec);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double v = 0.0;
    for (const auto& term : poly) {
      double arg = 0.0;
      for (int a = 0; a < spec.axes(); ++a) arg += term.mode[a] * spec.coordinate(p, a);
      v += term.amplitude * std::cos(2.0 * std::numbers::pi * arg + term.phase);
    }
    out[p] = v;
  }
  return out;
}

inline int max_mode(const TrigPolynomial& poly) {
  int m = 0;
  for (const auto& term : poly)
    for (int k : term.mode) m = std::max(m, std::abs(k));
  return m;
}

struct FlatMetric {};

struct ConformalFlatMetric {
  TrigPolynomial phi;
};

/// One real part of one entry g_{i jbar}, i <= j, 0-based.
struct EntryPerturbation {
  int i = 0;
  int j = 0;
  bool imaginary = false;
  TrigPolynomial terms;
};

struct PerturbedHermitianMetric {
  std::vector<EntryPerturbation> entries;
};

struct ExplicitFileMetric {
  std::filesystem::path path;
};

using MetricSpec =
    std::variant<FlatMetric, ConformalFlatMetric, PerturbedHermitianMetric, ExplicitFileMetric>;

inline std::string family_name(const MetricSpec& spec) {
  switch (spec.index()) {
    case 0: return "flat";
    case 1: return "conformal_flat";
    case 2: return "perturbed_hermitian";
    default: return "file";
  }
}

/// Smallest eigenvalue every realized metric must keep.
inline constexpr double positivity_margin = 0.1;

namespace detail {

inline std::vector<Complex> identity_entries(const GridSpec& grid) {
  const int n = grid.n();
  std::vector<Complex> e(static_cast<std::size_t>(n) * n * grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (int i = 0; i < n; ++i) e[(p * n + i) * n + i] = 1.0;
  return e;
}

inline std::vector<Complex> file_entries(const ExplicitFileMetric& spec, const GridSpec& grid) {
  const int n = grid.n();
  const auto records = read_fields(spec.path);
  if (records.size() != static_cast<std::size_t>(n) * n) {
    throw Error(ErrorKind::ShapeMismatch, spec.path.string() + " holds " +
                                              std::to_string(records.size()) +
                                              " records, expected " + std::to_string(n * n));
  }
  for (const auto& r : records) {
    if (!(r.spec() == grid)) {
      throw Error(ErrorKind::ShapeMismatch,
                  spec.path.string() + " grid differs from the scenario grid");
    }
  }
  std::vector<Complex> e(static_cast<std::size_t>(n) * n * grid.size());
  std::size_t r = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const ScalarField& re = records[r++];
      const ScalarField* im = i < j ? &records[r++] : nullptr;
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const Complex v(re[p], im ? (*im)[p] : 0.0);
        e[(p * n + i) * n + j] = v;
        e[(p * n + j) * n + i] = std::conj(v);
      }
    }
  }
  return e;
}

}  // namespace detail

/// Samples the metric family on the grid and enforces the positivity margin.
inline HermitianMetricField realize(const MetricSpec& spec, const GridSpec& grid) {
  const int n = grid.n();
  std::vector<Complex> e;
  if (std::holds_alternative<FlatMetric>(spec)) {
    e = detail::identity_entries(grid);
  } else if (const auto* cf = std::get_if<ConformalFlatMetric>(&spec)) {
    const ScalarField phi = evaluate(cf->phi, grid);
    e = detail::identity_entries(grid);
    for (std::size_t p = 0; p < grid.size(); ++p)
      for (int i = 0; i < n; ++i) e[(p * n + i) * n + i] = std::exp(phi[p]);
  } else if (const auto* ph = std::get_if<PerturbedHermitianMetric>(&spec)) {
    e = detail::identity_entries(grid);
    for (const auto& entry : ph->entries) {
      if (entry.i < 0 || entry.j < 0 || entry.i >= n || entry.j >= n || entry.i > entry.j) {
        throw Error(ErrorKind::InvalidArgument, "perturbed entry needs 0 <= i <= j < n");
      }
      if (entry.imaginary && entry.i == entry.j) {
        throw Error(ErrorKind::InvalidArgument, "diagonal entries are real");
      }
      const ScalarField v = evaluate(entry.terms, grid);
      const Complex unit = entry.imaginary ? Complex(0.0, 1.0) : Complex(1.0, 0.0);
      for (std::size_t p = 0; p < grid.size(); ++p) {
        e[(p * n + entry.i) * n + entry.j] += unit * v[p];
        if (entry.i != entry.j) e[(p * n + entry.j) * n + entry.i] += std::conj(unit) * v[p];
      }
    }
  } else {
    e = detail::file_entries(std::get<ExplicitFileMetric>(spec), grid);
  }

  const std::size_t nn = static_cast<std::size_t>(n) * n;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double lo = detail::min_eigenvalue(&e[p * nn], n);
    if (!(lo >= positivity_margin - 1e-12)) {
      throw Error(ErrorKind::LostPositivity,
                  "smallest eigenvalue " + std::to_string(lo) + " below margin " +
                      std::to_string(positivity_margin) + " at " +
                      detail::describe_point(grid, p));
    }
  }
  return HermitianMetricField(grid, std::move(e));
}

/// Closed-form extremal factor up to a constant, when the family has one:
/// for e^phi * flat the flat metric is extremal, so f_E = -phi.
inline std::optional<ScalarField> analytic_extremal_factor(const MetricSpec& spec,
                                                           const GridSpec& grid) {
  if (std::holds_alternative<FlatMetric>(spec)) return ScalarField(grid);
  if (const auto* cf = std::get_if<ConformalFlatMetric>(&spec)) return -evaluate(cf->phi, grid);
  return std::nullopt;
}

/// Check thresholds, from exact-by-construction identities down to
/// end-to-end solves. `krylov` is the solver target and is not a check.
struct Tolerances {
  double machine = 1e-12;
  /// Bound on C_n of the computed extremal metric.
  double functional = 1e-10;
  double spectral = 1e-8;
  double identity = 1e-7;
  double end_to_end = 1e-6;
  double krylov = 1e-10;

  void override_all(double tol) { machine = functional = spectral = identity = end_to_end = tol; }
};

enum class TaskKind { Solve, Verify, Calabi, Sweep };

inline std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::Solve: return "solve";
    case TaskKind::Verify: return "verify";
    case TaskKind::Calabi: return "calabi";
    case TaskKind::Sweep: return "sweep";
  }
  return "?";
}

struct Task {
  TaskKind kind = TaskKind::Solve;
  std::vector<double> p;
  std::vector<double> t{0.0};
  std::vector<int> sweep_N{8, 16, 32};
};

struct Scenario {
  std::string name;
  int n = 2;
  int N = 16;
  MetricSpec metric;
  Task task;
  Tolerances tolerances;
  std::uint64_t seed = 0;

  GridSpec grid() const { return GridSpec(n, N); }
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field,
                         const std::string& what) const {
    std::string where = source_;
    if (node.IsDefined() && node.Mark().line >= 0) {
      where += ":" + std::to_string(node.Mark().line + 1);
    }
    throw Error(ErrorKind::ConfigError, where + ": field '" + field + "': " + what);
  }

  YAML::Node require(const YAML::Node& parent, const std::string& key,
                     const std::string& path) const {
    const YAML::Node v = parent[key];
    if (!v) fail(parent, path, "missing required key '" + key + "'");
    return v;
  }

  template <class T>
  T as(const YAML::Node& node, const std::string& path) const {
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, path, "wrong type or value");
    }
  }

  template <class T>
  std::vector<T> list(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence()) fail(node, path, "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.push_back(as<T>(node[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  void only_keys(const YAML::Node& node, const std::string& path,
                 std::initializer_list<const char*> allowed) const {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail(kv.first, path.empty() ? key : path + "." + key, "unknown key");
    }
  }

  TrigPolynomial terms(const YAML::Node& node, const std::string& path, int axes) const {
    if (!node.IsSequence()) fail(node, path, "expected a list of terms");
    TrigPolynomial out;
    for (std::size_t k = 0; k < node.size(); ++k) {
      const std::string at = path + "[" + std::to_string(k) + "]";
      const YAML::Node t = node[k];
      only_keys(t, at, {"mode", "amplitude", "phase"});
      TrigTerm term;
      term.mode = list<int>(require(t, "mode", at + ".mode"), at + ".mode");
      if (static_cast<int>(term.mode.size()) != axes) {
        fail(t["mode"], at + ".mode", "needs " + std::to_string(axes) + " entries (one per axis)");
      }
      term.amplitude = as<double>(require(t, "amplitude", at + ".amplitude"), at + ".amplitude");
      if (t["phase"]) term.phase = as<double>(t["phase"], at + ".phase");
      out.push_back(std::move(term));
    }
    return out;
  }

 private:
  std::string source_;
};

}  // namespace detail

/// Parses a scenario document. `source` names it in error messages and
/// `base_dir` resolves relative metric file paths.
inline Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>",
                               const std::filesystem::path& base_dir = {}) {
  detail::ConfigReader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::ConfigError,
                source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) r.fail(root, "<root>", "expected a mapping");
  r.only_keys(root, "", {"name", "n", "N", "seed", "metric", "task", "tolerances"});

  Scenario s;
  s.name = r.as<std::string>(r.require(root, "name", "name"), "name");
  if (s.name.empty() || s.name.find_first_of("/\\ \t") != std::string::npos) {
    r.fail(root["name"], "name", "must be non-empty without spaces or slashes");
  }
  s.n = r.as<int>(r.require(root, "n", "n"), "n");
  s.N = r.as<int>(r.require(root, "N", "N"), "N");
  try {
    (void)GridSpec(s.n, s.N);
  } catch (const Error& e) {
    r.fail(root["N"], "n/N", e.what());
  }
  if (root["seed"]) s.seed = r.as<std::uint64_t>(root["seed"], "seed");

  const YAML::Node m = r.require(root, "metric", "metric");
  const auto family = r.as<std::string>(r.require(m, "family", "metric.family"), "metric.family");
  if (family == "flat") {
    r.only_keys(m, "metric", {"family"});
    s.metric = FlatMetric{};
  } else if (family == "conformal_flat") {
    r.only_keys(m, "metric", {"family", "phi"});
    s.metric = ConformalFlatMetric{r.terms(r.require(m, "phi", "metric.phi"), "metric.phi",
                                           2 * s.n)};
  } else if (family == "perturbed_hermitian") {
    r.only_keys(m, "metric", {"family", "entries"});
    const YAML::Node entries = r.require(m, "entries", "metric.entries");
    if (!entries.IsSequence()) r.fail(entries, "metric.entries", "expected a list");
    PerturbedHermitianMetric ph;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const std::string at = "metric.entries[" + std::to_string(k) + "]";
      const YAML::Node e = entries[k];
      r.only_keys(e, at, {"i", "j", "part", "terms"});
      EntryPerturbation ep;
      ep.i = r.as<int>(r.require(e, "i", at + ".i"), at + ".i") - 1;
      ep.j = r.as<int>(r.require(e, "j", at + ".j"), at + ".j") - 1;
      if (ep.i < 0 || ep.j >= s.n || ep.i > ep.j) {
        r.fail(e, at, "needs 1 <= i <= j <= n");
      }
      const std::string part = e["part"] ? r.as<std::string>(e["part"], at + ".part") : "re";
      if (part != "re" && part != "im") r.fail(e["part"], at + ".part", "must be re or im");
      ep.imaginary = part == "im";
      if (ep.imaginary && ep.i == ep.j) r.fail(e, at + ".part", "diagonal entries are real");
      ep.terms = r.terms(r.require(e, "terms", at + ".terms"), at + ".terms", 2 * s.n);
      ph.entries.push_back(std::move(ep));
    }
    s.metric = std::move(ph);
  } else if (family == "file") {
    r.only_keys(m, "metric", {"family", "path"});
    std::filesystem::path p = r.as<std::string>(r.require(m, "path", "metric.path"), "metric.path");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    s.metric = ExplicitFileMetric{p};
  } else {
    r.fail(m["family"], "metric.family",
           "unknown family '" + family + "' (flat, conformal_flat, perturbed_hermitian, file)");
  }

  if (const YAML::Node t = root["task"]) {
    r.only_keys(t, "task", {"kind", "p", "t", "N"});
    const auto kind = r.as<std::string>(r.require(t, "kind", "task.kind"), "task.kind");
    if (kind == "solve") s.task.kind = TaskKind::Solve;
    else if (kind == "verify") s.task.kind = TaskKind::Verify;
    else if (kind == "calabi") s.task.kind = TaskKind::Calabi;
    else if (kind == "sweep") s.task.kind = TaskKind::Sweep;
    else r.fail(t["kind"], "task.kind", "unknown task '" + kind + "'");
    if (t["p"]) s.task.p = r.list<double>(t["p"], "task.p");
    for (double p : s.task.p) {
      if (!(p > 1.0)) r.fail(t["p"], "task.p", "exponents must exceed 1");
    }
    if (t["t"]) s.task.t = r.list<double>(t["t"], "task.t");
    if (t["N"]) {
      s.task.sweep_N = r.list<int>(t["N"], "task.N");
      if (s.task.sweep_N.size() < 2 ||
          !std::is_sorted(s.task.sweep_N.begin(), s.task.sweep_N.end(), std::less_equal<>())) {
        r.fail(t["N"], "task.N", "needs at least two strictly ascending sizes");
      }
      for (int N : s.task.sweep_N) {
        try {
          (void)GridSpec(s.n, N);
        } catch (const Error& e) {
          r.fail(t["N"], "task.N", e.what());
        }
      }
    }
  }
  if (s.task.p.empty()) s.task.p = {2.0, static_cast<double>(s.n)};

  if (const YAML::Node tol = root["tolerances"]) {
    r.only_keys(tol, "tolerances", {"machine", "functional", "spectral", "identity", "end_to_end", "krylov"});
    auto read = [&](const char* key, double& dst) {
      if (!tol[key]) return;
      dst = r.as<double>(tol[key], std::string("tolerances.") + key);
      if (!(dst > 0.0)) r.fail(tol[key], std::string("tolerances.") + key, "must be positive");
    };
    read("machine", s.tolerances.machine);
    read("functional", s.tolerances.functional);
    read("spectral", s.tolerances.spectral);
    read("identity", s.tolerances.identity);
    read("end_to_end", s.tolerances.end_to_end);
    read("krylov", s.tolerances.krylov);
  }
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::ConfigError, "cannot read scenario " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str(), path.string(), path.parent_path());
}

}  // namespace chern_extremal
