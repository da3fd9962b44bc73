#pragma once

// JSON reports: solver reports, variation reports, checks and the scenario
// echo. Everything outside the "run" block is a deterministic function of
// the scenario and seed.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "chern_extremal/calabi.hpp"
#include "chern_extremal/errors.hpp"
#include "chern_extremal/extremal.hpp"
#include "chern_extremal/krylov.hpp"
#include "chern_extremal/scenario.hpp"

namespace chern_extremal {

using Json = nlohmann::ordered_json;

/// One pass/fail assertion recorded in a report.
struct Check {
  std::string name;
  std::string description;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// value <= tolerance, treating NaN as failure.
inline Check make_check(std::string name, std::string description, double value,
                        double tolerance) {
  return {std::move(name), std::move(description), value, tolerance, value <= tolerance};
}

inline Json to_json(const Check& c) {
  return {{"name", c.name},
          {"description", c.description},
          {"value", c.value},
          {"tolerance", c.tolerance},
          {"passed", c.passed}};
}

inline Json to_json(const SolveReport& r) {
  Json constants = Json::object();
  for (const auto& [k, v] : r.constants) constants[k] = v;
  Json tolerances = Json::array();
  for (const auto& t : r.tolerances) {
    tolerances.push_back({{"name", t.name}, {"value", t.value}, {"source", t.source}});
  }
  return {{"method", r.method},
          {"iterations", r.iterations},
          {"restarts", r.restarts},
          {"initial_residual", r.initial_residual},
          {"relative_residual", r.relative_residual},
          {"converged", r.converged},
          {"constants", constants},
          {"tolerances", tolerances}};
}

inline Json to_json(const VariationReport& r) {
  return {{"p", r.p},
          {"t", r.t},
          {"formula_value", r.formula_value},
          {"fd_value", r.fd_value},
          {"rel_error", r.rel_error},
          {"a1", r.parts.a1},
          {"a2", r.parts.a2},
          {"a3", r.parts.a3},
          {"fd_step", r.fd_step},
          {"fd_method", r.fd_method}};
}

inline Json to_json(const PowerIdentities& r) {
  return {{"p", r.p},
          {"gauduchon_integral", r.gauduchon_integral},
          {"product_rule", r.product_rule},
          {"adjoint_pairing_lhs", r.adjoint_pairing_lhs},
          {"adjoint_pairing_rhs", r.adjoint_pairing_rhs},
          {"extremal_pairing", r.extremal_pairing},
          {"scale", r.scale},
          {"defect", r.defect}};
}

inline Json to_json(const TrigPolynomial& poly) {
  Json out = Json::array();
  for (const auto& t : poly) {
    out.push_back({{"mode", t.mode}, {"amplitude", t.amplitude}, {"phase", t.phase}});
  }
  return out;
}

inline Json to_json(const MetricSpec& spec) {
  Json out = {{"family", family_name(spec)}};
  if (const auto* cf = std::get_if<ConformalFlatMetric>(&spec)) {
    out["phi"] = to_json(cf->phi);
  } else if (const auto* ph = std::get_if<PerturbedHermitianMetric>(&spec)) {
    Json entries = Json::array();
    for (const auto& e : ph->entries) {
      entries.push_back({{"i", e.i + 1},
                         {"j", e.j + 1},
                         {"part", e.imaginary ? "im" : "re"},
                         {"terms", to_json(e.terms)}});
    }
    out["entries"] = entries;
  } else if (const auto* f = std::get_if<ExplicitFileMetric>(&spec)) {
    out["path"] = f->path.generic_string();
  }
  return out;
}

inline Json to_json(const Tolerances& t) {
  return {{"machine", t.machine},         {"functional", t.functional},
          {"spectral", t.spectral},       {"identity", t.identity},
          {"end_to_end", t.end_to_end},   {"krylov", t.krylov}};
}

inline Json to_json(const Scenario& s) {
  return {{"name", s.name},
          {"n", s.n},
          {"N", s.N},
          {"seed", s.seed},
          {"metric", to_json(s.metric)},
          {"task",
           {{"kind", to_string(s.task.kind)},
            {"p", s.task.p},
            {"t", s.task.t},
            {"N", s.task.sweep_N}}},
          {"tolerances", to_json(s.tolerances)}};
}

inline void write_json(const Json& j, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  os << j.dump(2) << "\n";
  if (!os) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoError, path.string() + ": " + e.what());
  }
}

}  // namespace chern_extremal
