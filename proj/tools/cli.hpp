#pragma once

// Command-line front end. Commands: monitor, sweep, optimize, simulate.
//
// Exit codes:
//   0  success
//   1  runtime failure (simulation diverged, I/O error)
//   2  configuration or formula error
//   3  trajectory shorter than the formula's necessary input length
//
// Configuration is one JSON document:
//   {
//     "model": "sir" | {"variables": [...], "parameters": {name: default},
//                       "rhs": {var: expr}, "init": {var: value}},
//     "trajectory": "path.csv",        // monitor a recorded trajectory instead
//     "init": {var: value}, "params": {name: value},
//     "space": {"axes": [{"name", "lo", "hi", "resolution"}],
//               "iterations": n, "threshold": t},
//     "formula": "...", "step": 0.01, "horizon": 10,
//     "seed": 0, "workers": 4, "out": "dir"
//   }

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stlstar/stlstar.hpp"

namespace stlstar::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kLengthError = 3 };

struct RunConfig {
  std::optional<OdeModel> model;
  std::optional<std::string> trajectory;
  std::vector<double> init;
  std::vector<double> params;
  std::optional<PerturbationSpace> space;
  std::string formula;
  double step = 0.01;
  std::optional<double> horizon;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string out;
};

namespace detail {

using nlohmann::json;

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError("'" + what + "' must be a number");
  return j.get<double>();
}

/// Vector indexed like `names` from either an array or a name->value object;
/// names missing from the object keep their value in `fallback`.
inline std::vector<double> named_values(const json& j, const std::vector<std::string>& names,
                                        std::vector<double> fallback, const std::string& what) {
  if (j.is_array()) {
    if (j.size() != names.size())
      throw ConfigError("'" + what + "' needs " + std::to_string(names.size()) + " values");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(number(v, what));
    return out;
  }
  if (!j.is_object()) throw ConfigError("'" + what + "' must be an object or an array");
  for (const auto& [key, value] : j.items()) {
    std::size_t i = 0;
    while (i < names.size() && names[i] != key) ++i;
    if (i == names.size()) throw ConfigError("'" + what + "' refers to unknown name '" + key + "'");
    fallback[i] = number(value, what + "." + key);
  }
  return fallback;
}

inline OdeModel parse_model(const json& j) {
  if (j.is_string()) return builtin(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("'model' must be a builtin name or an object");
  if (!j.contains("variables") || !j["variables"].is_array()) throw ConfigError("model needs a 'variables' array");
  std::vector<std::string> vars;
  for (const auto& v : j["variables"]) {
    if (!v.is_string()) throw ConfigError("model variables must be strings");
    vars.push_back(v.get<std::string>());
  }
  std::vector<std::string> params;
  std::vector<double> defaults;
  if (j.contains("parameters")) {
    const auto& p = j["parameters"];
    if (!p.is_object()) throw ConfigError("model 'parameters' must map names to default values");
    for (const auto& [key, value] : p.items()) {
      params.push_back(key);
      defaults.push_back(number(value, "parameters." + key));
    }
  }
  if (!j.contains("rhs") || !j["rhs"].is_object()) throw ConfigError("model needs an 'rhs' object");
  std::map<std::string, std::string> rhs;
  for (const auto& [key, value] : j["rhs"].items()) {
    if (!value.is_string()) throw ConfigError("rhs." + key + " must be an expression string");
    rhs[key] = value.get<std::string>();
  }
  std::vector<double> init(vars.size(), 0.0);
  if (j.contains("init")) init = named_values(j["init"], vars, init, "model.init");
  return expression_model(j.value("name", std::string("custom")), vars, params, rhs, init, defaults);
}

inline PerturbationSpace parse_space(const json& j) {
  if (!j.is_object() || !j.contains("axes") || !j["axes"].is_array())
    throw ConfigError("'space' needs an 'axes' array");
  PerturbationSpace space;
  for (const auto& a : j["axes"]) {
    if (!a.is_object() || !a.contains("name") || !a.contains("lo") || !a.contains("hi"))
      throw ConfigError("each axis needs name, lo and hi");
    Axis axis;
    axis.name = a["name"].get<std::string>();
    axis.lo = number(a["lo"], "axis.lo");
    axis.hi = number(a["hi"], "axis.hi");
    const double res = a.contains("resolution") ? number(a["resolution"], "axis.resolution") : 2.0;
    if (res < 2 || res != static_cast<double>(static_cast<std::size_t>(res)))
      throw ConfigError("axis '" + axis.name + "' needs an integer resolution >= 2");
    axis.resolution = static_cast<std::size_t>(res);
    space.axes.push_back(axis);
  }
  if (j.contains("iterations")) {
    const double it = number(j["iterations"], "space.iterations");
    if (it < 0 || it != static_cast<double>(static_cast<std::size_t>(it)))
      throw ConfigError("'space.iterations' must be a non-negative integer");
    space.iterations = static_cast<std::size_t>(it);
  }
  if (j.contains("threshold")) space.threshold = number(j["threshold"], "space.threshold");
  space.validate();
  return space;
}

}  // namespace detail

inline RunConfig load_config(const nlohmann::json& j) {
  using detail::number;
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::vector<std::string> known = {"model", "trajectory", "init", "params", "space", "formula",
                                                 "step", "horizon", "seed", "workers", "out"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown configuration key '" + key + "'");

  RunConfig cfg;
  if (j.contains("model")) cfg.model = detail::parse_model(j["model"]);
  if (j.contains("trajectory")) cfg.trajectory = j["trajectory"].get<std::string>();
  if (cfg.model) {
    cfg.init = cfg.model->default_init;
    cfg.params = cfg.model->default_params;
    if (j.contains("init")) cfg.init = detail::named_values(j["init"], cfg.model->variables, cfg.init, "init");
    if (j.contains("params"))
      cfg.params = detail::named_values(j["params"], cfg.model->parameters, cfg.params, "params");
  } else if (j.contains("init") || j.contains("params")) {
    throw ConfigError("'init' and 'params' need a 'model'");
  }
  if (j.contains("space")) cfg.space = detail::parse_space(j["space"]);
  if (j.contains("formula")) {
    if (!j["formula"].is_string()) throw ConfigError("'formula' must be a string");
    cfg.formula = j["formula"].get<std::string>();
  }
  if (j.contains("step")) cfg.step = number(j["step"], "step");
  if (!(cfg.step > 0.0)) throw ConfigError("'step' must be positive");
  if (j.contains("horizon")) {
    cfg.horizon = number(j["horizon"], "horizon");
    if (!(*cfg.horizon > 0.0)) throw ConfigError("'horizon' must be positive");
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<std::size_t>();
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path);
  try {
    return load_config(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace detail {

inline void print_optimization(std::ostream& out, const OptimizationReport& report, bool explain) {
  out << "formula: " << format(report.original) << '\n';
  out << "optimized: " << format(report.optimized) << '\n';
  out << "indices: " << report.indices_before << " -> " << report.indices_after << '\n';
  if (explain) {
    if (report.steps.empty()) out << "pass: (no pass changed the formula)\n";
    for (const auto& step : report.steps) out << "pass " << step.pass << ": " << format(step.result) << '\n';
  }
}

inline Formula parse_formula(const RunConfig& cfg) {
  if (cfg.formula.empty()) throw ConfigError("no formula given (use --formula or the 'formula' key)");
  return parse(cfg.formula);
}

inline double horizon_for(const RunConfig& cfg, const Formula& phi) {
  return cfg.horizon.value_or(std::max(necessary_length(phi), cfg.step));
}

inline TimedStateSequence trajectory_for(const RunConfig& cfg, const Formula& phi) {
  if (cfg.trajectory) return read_csv(*cfg.trajectory);
  if (!cfg.model) throw ConfigError("need a 'model' or a 'trajectory'");
  return integrate(*cfg.model, cfg.init, cfg.params, cfg.step, horizon_for(cfg, phi));
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const LengthError& e) {
    err << "error: " << e.what() << '\n';
    return kLengthError;
  } catch (const ParseError& e) {
    err << "error: formula: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FormulaError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace detail

/// Prints robustness, Boolean satisfaction and the optimized formula.
inline int cmd_monitor(const RunConfig& cfg, bool explain, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    Formula phi = detail::parse_formula(cfg);
    auto report = optimize_with_report(phi);
    auto seq = detail::trajectory_for(cfg, phi);
    detail::print_optimization(out, report, explain);
    try {
      const double rho = monitor(report.optimized, seq);
      const bool sat = boolean_monitor(phi, seq);
      out << "robustness: " << format_robustness(rho) << '\n';
      out << "satisfied: " << (sat ? "true" : "false") << '\n';
      if (rho == 0.0) err << "warning: robustness is exactly 0; its sign carries no information\n";
    } catch (const LengthError& e) {
      out << "satisfied: false\n";
      err << "warning: " << e.what() << "; reporting the formula as not satisfied\n";
      return static_cast<int>(kLengthError);
    }
    return static_cast<int>(kOk);
  });
}

/// Runs the sweep, writes sweep.csv / sweep.svg into the output directory
/// and prints a summary.
inline int cmd_sweep(const RunConfig& cfg, bool explain, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    Formula phi = detail::parse_formula(cfg);
    if (!cfg.model) throw ConfigError("sweep needs a 'model'");
    if (!cfg.space) throw ConfigError("sweep needs a 'space'");
    SimulationConfig sim;
    sim.init = cfg.init;
    sim.params = cfg.params;
    sim.step = cfg.step;
    sim.horizon = detail::horizon_for(cfg, phi);
    SweepOptions options;
    options.workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
    options.progress = &err;
    auto report = optimize_with_report(phi);
    detail::print_optimization(out, report, explain);
    auto result = run_sweep(*cfg.model, *cfg.space, phi, sim, options);

    const std::filesystem::path dir = cfg.out.empty() ? std::filesystem::path(".") : std::filesystem::path(cfg.out);
    std::filesystem::create_directories(dir);
    export_sweep(result, (dir / "sweep").string());

    out << "formula size: " << phi->size() << '\n';
    out << "trajectories: " << result.points.size() << '\n';
    out << "points per trajectory: " << result.samples_per_trajectory << '\n';
    out << "positive: " << result.positive() << '\n';
    out << "negative: " << result.negative() << '\n';
    out << "failed: " << result.failures << '\n';
    out << "threshold: " << format_robustness(result.threshold) << '\n';
    out << "seed: " << cfg.seed << '\n';
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2f", result.seconds);
    out << "time: " << secs << " s\n";
    if (result.zero_robustness)
      err << "warning: " << result.zero_robustness << " points have robustness exactly 0 (recorded as unsatisfied)\n";
    for (const auto& p : result.points)
      if (!p.ok()) err << "warning: point failed: " << p.error << '\n';
    return static_cast<int>(kOk);
  });
}

/// Prints original and optimized formulas and index counts.
inline int cmd_optimize(const std::string& formula, bool explain, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (formula.empty()) throw ConfigError("no formula given");
    detail::print_optimization(out, optimize_with_report(parse(formula)), explain);
    return static_cast<int>(kOk);
  });
}

/// Writes the simulated trajectory as CSV (to <out>/trajectory.csv, or to
/// `out` when no output directory is set).
inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (!cfg.model) throw ConfigError("simulate needs a 'model'");
    double horizon = 0.0;
    if (cfg.horizon) horizon = *cfg.horizon;
    else if (!cfg.formula.empty()) horizon = std::max(necessary_length(parse(cfg.formula)), cfg.step);
    else throw ConfigError("simulate needs a 'horizon' or a 'formula'");
    auto seq = integrate(*cfg.model, cfg.init, cfg.params, cfg.step, horizon);
    if (cfg.out.empty()) {
      write_csv(out, seq);
    } else {
      std::filesystem::create_directories(cfg.out);
      const auto path = (std::filesystem::path(cfg.out) / "trajectory.csv").string();
      std::ofstream file(path);
      if (!file) throw Error("cannot write " + path);
      write_csv(file, seq);
      out << "wrote " << path << " (" << seq.size() << " samples)\n";
    }
    return static_cast<int>(kOk);
  });
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"STL* robustness monitoring, formula optimization and parameter sweeps"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> formula;
  std::optional<std::string> trajectory;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out_dir;
  bool explain = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration");
    cmd->add_option("--formula", formula, "formula text (overrides the configuration)");
    cmd->add_option("--seed", seed, "seed recorded with the run");
    cmd->add_option("--workers", workers, "worker threads for sweeps");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_flag("--explain", explain, "print the rewrite chain");
  };
  auto* monitor_cmd = app.add_subcommand("monitor", "robustness of one trajectory");
  add_common(monitor_cmd);
  monitor_cmd->add_option("--trajectory", trajectory, "CSV trajectory to monitor");
  auto* sweep_cmd = app.add_subcommand("sweep", "robustness over a perturbation space");
  add_common(sweep_cmd);
  auto* optimize_cmd = app.add_subcommand("optimize", "rewrite a formula to use fewer frozen indices");
  add_common(optimize_cmd);
  auto* simulate_cmd = app.add_subcommand("simulate", "dump a simulated trajectory as CSV");
  add_common(simulate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, r;
    const int code = app.exit(e, o, r);
    out << o.str();
    err << r.str();
    return code == 0 ? static_cast<int>(kOk) : static_cast<int>(kConfigError);
  }

  RunConfig cfg;
  if (!config_path.empty()) {
    const int code = detail::guarded(err, [&] {
      cfg = load_config_file(config_path);
      return static_cast<int>(kOk);
    });
    if (code != kOk) return code;
  }
  if (formula) cfg.formula = *formula;
  if (trajectory) cfg.trajectory = *trajectory;
  if (seed) cfg.seed = *seed;
  if (workers) cfg.workers = *workers;
  if (out_dir) cfg.out = *out_dir;

  if (monitor_cmd->parsed()) return cmd_monitor(cfg, explain, out, err);
  if (sweep_cmd->parsed()) return cmd_sweep(cfg, explain, out, err);
  if (optimize_cmd->parsed()) return cmd_optimize(cfg.formula, explain, out, err);
  return cmd_simulate(cfg, out, err);
}

}  // namespace stlstar::cli
