#pragma once

// Command-line front end: argument parsing, run directories and console
// output around the command layer.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chern_extremal/commands.hpp"
#include "chern_extremal/fft.hpp"
#include "chern_extremal/field_io.hpp"
#include "chern_extremal/report.hpp"
#include "chern_extremal/scenario.hpp"

namespace chern_extremal::cli {

enum ExitCode : int { ok = 0, error = 1, check_failed = 2 };

struct Options {
  std::string command;
  std::string target;
  std::filesystem::path out = "runs";
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool csv = false;
  std::vector<double> p;
  std::vector<double> t;
};

inline std::string utc_timestamp(std::chrono::system_clock::time_point now) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return os.str();
}

/// Creates <out>/<name>_<timestamp>, suffixed if that already exists.
inline std::filesystem::path make_run_dir(const std::filesystem::path& out,
                                          const std::string& name, const std::string& stamp) {
  std::filesystem::create_directories(out);
  std::filesystem::path dir = out / (name + "_" + stamp);
  for (int k = 2; std::filesystem::exists(dir); ++k) {
    dir = out / (name + "_" + stamp + "_" + std::to_string(k));
  }
  std::filesystem::create_directory(dir);
  return dir;
}

/// Points <out>/latest at the run directory: a relative symlink where the
/// filesystem allows it, otherwise a copy.
inline void update_latest(const std::filesystem::path& out, const std::filesystem::path& dir) {
  const std::filesystem::path latest = out / "latest";
  std::error_code ec;
  std::filesystem::remove_all(latest, ec);
  std::filesystem::create_directory_symlink(dir.filename(), latest, ec);
  if (ec) {
    std::filesystem::copy(dir, latest, std::filesystem::copy_options::recursive);
  }
}

inline void print_checks(std::ostream& os, const Json& checks) {
  for (const auto& c : checks) {
    os << (c["passed"].get<bool>() ? "  PASS  " : "  FAIL  ") << std::left << std::setw(36)
       << c["name"].get<std::string>() << std::right << std::scientific << std::setprecision(3)
       << c["value"].get<double>() << "  (tol " << c["tolerance"].get<double>() << ")\n";
  }
  os << std::defaultfloat;
}

inline int print_report(const std::filesystem::path& target, std::ostream& os) {
  const std::filesystem::path path =
      std::filesystem::is_directory(target) ? target / "report.json" : target;
  const Json j = read_json(path);
  os << "report   " << path.string() << "\n";
  os << "command  " << j.value("command", "?") << "\n";
  if (j.contains("scenario")) {
    const Json& s = j["scenario"];
    os << "scenario " << s.value("name", "?") << " (n=" << s.value("n", 0)
       << ", N=" << s.value("N", 0) << ", metric " << s["metric"].value("family", "?")
       << ", seed " << s.value("seed", 0) << ")\n";
  }
  os << "status   " << j.value("status", "?") << "\n";
  if (j.contains("checks")) {
    os << "checks\n";
    print_checks(os, j["checks"]);
  }
  if (j.contains("results")) os << "results\n" << j["results"].dump(2) << "\n";
  if (j.contains("run")) os << "run\n" << j["run"].dump(2) << "\n";
  return ExitCode::ok;
}

inline int execute(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.command == "report") return print_report(opt.target, out);

  Scenario s = load_scenario(opt.target);
  if (opt.seed) s.seed = *opt.seed;
  if (opt.tol) {
    if (!(*opt.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "--tol must be positive");
    s.tolerances.override_all(*opt.tol);
  }
  if (opt.command == "calabi") {
    if (!opt.p.empty()) s.task.p = opt.p;
    if (!opt.t.empty()) s.task.t = opt.t;
    for (double p : s.task.p) require_exponent_above_one(p);
  }

  Progress progress;
  if (!opt.quiet) progress = [&err](const std::string& msg) { err << "[" << msg << "]\n"; };

  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  CommandResult result;
  if (opt.command == "solve") result = run_solve(s, progress);
  else if (opt.command == "verify") result = run_verify(s, progress);
  else if (opt.command == "calabi") result = run_calabi(s, s.task.p, s.task.t, progress);
  else if (opt.command == "sweep") result = run_sweep(s, progress);
  else throw Error(ErrorKind::InvalidArgument, "unknown command " + opt.command);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string stamp = utc_timestamp(started);
  const std::filesystem::path dir = make_run_dir(opt.out, s.name, stamp);
  Json files = Json::array();
  for (const auto& [name, field] : result.fields) {
    write_field(field, dir / (name + ".cexf"));
    files.push_back(name + ".cexf");
    if (opt.csv) {
      write_csv(field, dir / (name + ".csv"));
      files.push_back(name + ".csv");
    }
  }
  Json checks = Json::array();
  for (const auto& c : result.checks) checks.push_back(to_json(c));
  const Json report = {{"command", opt.command},
                       {"scenario", to_json(s)},
                       {"status", result.passed() ? "pass" : "fail"},
                       {"checks", checks},
                       {"results", result.results},
                       {"files", files},
                       {"run",
                        {{"timestamp", stamp},
                         {"elapsed_seconds", elapsed},
                         {"threads", fft::configured_threads()}}}};
  write_json(report, dir / "report.json");
  update_latest(opt.out, dir);

  if (!opt.quiet) {
    out << opt.command << " " << s.name << ": " << (result.passed() ? "pass" : "FAIL") << "\n";
    print_checks(out, checks);
    out << "output   " << dir.string() << "\n";
  }
  return result.passed() ? ExitCode::ok : ExitCode::check_failed;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Gauduchon and conformal extremal metrics on the complex torus"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("scenario", opt.target, "scenario file")->required();
    sub->add_option("--out", opt.out, "directory receiving run directories")
        ->capture_default_str();
    sub->add_option("--tol", opt.tol, "override every check tolerance");
    sub->add_option("--seed", opt.seed, "override the scenario seed");
    sub->add_flag("--quiet", opt.quiet, "print nothing unless an error occurs");
    sub->add_flag("--csv", opt.csv, "also write fields as CSV");
  };
  auto* solve = app.add_subcommand("solve", "compute the Gauduchon and extremal metrics");
  auto* verify = app.add_subcommand("verify", "run the identity suite");
  auto* calabi = app.add_subcommand("calabi", "functional values and variation checks");
  auto* sweep = app.add_subcommand("sweep", "grid refinement study of the extremal factor");
  auto* report = app.add_subcommand("report", "pretty-print a stored report");
  for (auto* sub : {solve, verify, calabi, sweep}) common(sub);
  calabi->add_option("--p", opt.p, "exponents, comma separated")->delimiter(',');
  calabi->add_option("--t", opt.t, "ray parameters, comma separated")->delimiter(',');
  report->add_option("path", opt.target, "report.json or a run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ExitCode::ok : ExitCode::error;
  }
  for (auto* sub : app.get_subcommands()) opt.command = sub->get_name();

  try {
    return execute(opt, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return ExitCode::error;
  }
}

}  // namespace chern_extremal::cli
