#include <yaml-cpp/yaml.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <regex>
#include <sstream>
#include <thread>

#include "app.hpp"
#include "bioreactor/config.hpp"
#include "bioreactor/error.hpp"
#include "bioreactor/format.hpp"
#include "bioreactor/verification.hpp"

namespace bioreactor::app {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("--config", "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::pair<std::string, std::string>> cli_overrides(const CommonOptions& options) {
  std::vector<std::pair<std::string, std::string>> out;
  if (options.checks) {
    out.emplace_back("checks", *options.checks ? "true" : "false");
  }
  if (options.verbose) {
    out.emplace_back("output.verbose", "true");
  }
  return out;
}

ScenarioConfig load_scenario(const std::string& text, const CommonOptions& options) {
  const auto overrides = cli_overrides(options);
  return parse_config(overrides.empty() ? text : apply_overrides(text, overrides));
}

/// Maps library exceptions to exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SolverError& e) {
    err << "solver failure";
    if (e.step() >= 0) {
      err << " at step " << e.step();
    }
    err << ": " << e.what() << '\n';
    if (!e.history().empty()) {
      err << "residual history:";
      for (double h : e.history()) {
        err << ' ' << format_double(h);
      }
      err << '\n';
    }
    return kSolverFailure;
  } catch (const InvalidStateError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

void report_failures(const DiagnosticsReport& report, std::ostream& err) {
  for (const auto& f : report.failures()) {
    err << "invariant check failed: " << f << '\n';
  }
}

struct SweepRun {
  std::string name;
  std::vector<std::pair<std::string, std::string>> overrides;
};

struct SweepRow {
  std::string name;
  std::string status = "ok";
  double effluent_S = std::numeric_limits<double>::quiet_NaN();
  double min_S = std::numeric_limits<double>::quiet_NaN();
  double min_B = std::numeric_limits<double>::quiet_NaN();
  double margin_B = std::numeric_limits<double>::quiet_NaN();
  double margin_S = std::numeric_limits<double>::quiet_NaN();
  double mass_residual = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
};

std::string parse_sweep(const std::filesystem::path& path, std::vector<SweepRun>& runs) {
  const std::string text = read_file(path);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line, e.mark.column);
  }
  if (!root || !root.IsMap()) {
    throw ConfigError("sweep", "expected a mapping with 'base' and 'runs'");
  }
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key != "base" && key != "runs") {
      throw ConfigError("sweep." + key, "unknown key");
    }
  }
  std::string base;
  const YAML::Node b = root["base"];
  if (!b || b.IsNull()) {
    base = "{}";
  } else if (b.IsScalar()) {
    base = read_file(path.parent_path() / b.as<std::string>());
  } else if (b.IsMap()) {
    base = YAML::Dump(b);
  } else {
    throw ConfigError("sweep.base", "must be a file path or a scenario mapping");
  }
  const YAML::Node list = root["runs"];
  if (list && !list.IsNull()) {
    if (!list.IsSequence()) {
      throw ConfigError("sweep.runs", "must be a list");
    }
    const std::regex valid_name("[A-Za-z0-9_.-]+");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const YAML::Node r = list[i];
      const std::string field = "sweep.runs[" + std::to_string(i) + "]";
      if (!r.IsMap() || !r["name"] || !r["name"].IsScalar()) {
        throw ConfigError(field, "needs a 'name'");
      }
      SweepRun run;
      run.name = r["name"].as<std::string>();
      if (!std::regex_match(run.name, valid_name) || run.name == "." || run.name == "..") {
        throw ConfigError(field + ".name", "must match [A-Za-z0-9_.-]+");
      }
      if (!names.insert(run.name).second) {
        throw ConfigError(field + ".name", "duplicate run name '" + run.name + "'");
      }
      for (const auto& kv : r) {
        const auto key = kv.first.as<std::string>();
        if (key != "name" && key != "set") {
          throw ConfigError(field + "." + key, "unknown key");
        }
      }
      if (const YAML::Node set = r["set"]; set && !set.IsNull()) {
        if (!set.IsMap()) {
          throw ConfigError(field + ".set", "must map dotted keys to values");
        }
        for (const auto& kv : set) {
          YAML::Emitter value;
          value.SetDoublePrecision(17);
          value << YAML::Flow << kv.second;
          run.overrides.emplace_back(kv.first.as<std::string>(), value.c_str());
        }
      }
      runs.push_back(std::move(run));
    }
  }
  return base;
}

SweepRow execute_run(const std::string& base, const SweepRun& run, const CommonOptions& options,
                     std::ostream& log, std::mutex& log_mutex) {
  SweepRow row;
  row.name = run.name;
  std::ostringstream messages;
  const int code = guarded(messages, [&]() {
    auto overrides = run.overrides;
    for (const auto& o : cli_overrides(options)) {
      overrides.push_back(o);
    }
    const ScenarioConfig config = parse_config(apply_overrides(base, overrides));
    const SimulationResult result = simulate(config);
    write_run_outputs(options.out_dir / run.name, config, result, options.verbose);
    const auto& r = result.report;
    row.effluent_S = outlet_mean(result.mesh, result.trajectory.final().S);
    row.min_S = r.nonnegativity.min_S;
    row.min_B = r.nonnegativity.min_B;
    row.margin_B = r.bounds.min_margin_B;
    row.margin_S = r.bounds.min_margin_S;
    row.mass_residual = r.mass.max_relative_residual;
    report_failures(r, messages);
    return r.pass() ? kOk : kInvariantFailure;
  });
  switch (code) {
    case kOk: row.status = "ok"; break;
    case kInvariantFailure: row.status = "invariant_failure"; break;
    case kSolverFailure: row.status = "solver_failure"; break;
    default: row.status = "config_error"; break;
  }
  row.pass = code == kOk;
  const std::string text = messages.str();
  if (!text.empty() || options.verbose) {
    const std::lock_guard lock(log_mutex);
    log << "[" << run.name << "] " << row.status << '\n' << text;
  }
  return row;
}

struct StudyOutcome {
  std::string name;
  StudyResult result;
  bool pass = false;
  std::string criterion;
};

}  // namespace

int run_command(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    if (options.config.empty()) {
      throw ConfigError("--config", "a scenario file is required");
    }
    const ScenarioConfig config = load_scenario(read_file(options.config), options);
    if (config.output.verbose) {
      err << "simulating " << config.num_steps() << " steps on " << config.mesh.n_axial << " axial cells\n";
    }
    const SimulationResult result = simulate(config);
    write_run_outputs(options.out_dir, config, result, config.output.verbose);
    const auto failures = result.report.failures();
    out << "effluent_S: " << format_double(outlet_mean(result.mesh, result.trajectory.final().S)) << '\n';
    out << "status: " << (failures.empty() ? "pass" : "FAIL") << '\n';
    report_failures(result.report, err);
    return failures.empty() ? kOk : kInvariantFailure;
  });
}

int sweep_command(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  std::vector<SweepRun> runs;
  std::string base;
  const int parsed = guarded(err, [&]() {
    if (options.config.empty()) {
      throw ConfigError("--config", "a sweep file is required");
    }
    base = parse_sweep(options.config, runs);
    std::filesystem::create_directories(options.out_dir);
    return kOk;
  });
  if (parsed != kOk) {
    return parsed;
  }

  std::vector<SweepRow> rows(runs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      rows[i] = execute_run(base, runs[i], options, err, log_mutex);
    }
  };
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), runs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < count; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) {
    t.join();
  }

  std::ofstream summary(options.out_dir / "sweep_summary.csv");
  summary << "name,status,effluent_S,min_S,min_B,min_margin_B,min_margin_S,mass_residual,pass\n";
  bool all_pass = true;
  for (const auto& r : rows) {
    summary << r.name << ',' << r.status << ',' << format_double(r.effluent_S) << ',' << format_double(r.min_S) << ','
            << format_double(r.min_B) << ',' << format_double(r.margin_B) << ',' << format_double(r.margin_S) << ','
            << format_double(r.mass_residual) << ',' << (r.pass ? "pass" : "fail") << '\n';
    out << r.name << ": " << r.status << '\n';
    all_pass = all_pass && r.pass;
  }
  out << runs.size() << " runs, " << std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.pass; })
      << " passed\n";
  return all_pass ? kOk : kInvariantFailure;
}

int mms_command(const CommonOptions& options, const std::string& which, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    std::filesystem::create_directories(options.out_dir);
    std::vector<std::function<StudyOutcome()>> jobs;
    if (which == "all" || which == "diffusion") {
      jobs.emplace_back([]() {
        StudyOutcome o{"diffusion", run_mms_study(diffusion_mms_case(), {8, 16, 32, 64},
                                                  [](double h) { return 0.5 * h * h; }),
                       false, "order >= 1.8"};
        o.pass = o.result.conclusive && o.result.observed_order >= 1.8;
        return o;
      });
    }
    if (which == "all" || which == "advection") {
      jobs.emplace_back([]() {
        StudyOutcome o{"advection", run_mms_study(advection_mms_case(), {16, 32, 64, 128},
                                                  [](double h) { return 2.0 * h * h; }),
                       false, "|order - 1| <= 0.2"};
        o.pass = o.result.conclusive && std::abs(o.result.observed_order - 1.0) <= 0.2;
        return o;
      });
    }
    if (which == "all" || which == "temporal") {
      jobs.emplace_back([]() {
        StudyOutcome o{"temporal", run_temporal_study(advection_mms_case(), 32, {0.05, 0.025, 0.0125, 0.00625}),
                       false, "|order - 1| <= 0.15"};
        o.pass = o.result.conclusive && std::abs(o.result.observed_order - 1.0) <= 0.15;
        return o;
      });
    }

    std::vector<StudyOutcome> outcomes(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        try {
          outcomes[i] = jobs[i]();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), jobs.size());
    for (std::size_t t = 1; t < count; ++t) {
      pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
      t.join();
    }
    for (const auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }

    bool all_pass = true;
    for (const auto& o : outcomes) {
      std::ofstream csv(options.out_dir / ("mms_" + o.name + ".csv"));
      write_study_csv(csv, o.result);
      out << o.name << ": order " << format_double(o.result.observed_order) << " ("
          << (o.result.conclusive ? "" : "inconclusive, ") << o.criterion << ") " << (o.pass ? "pass" : "FAIL")
          << '\n';
      all_pass = all_pass && o.pass;
    }
    return all_pass ? kOk : kInvariantFailure;
  });
}

int check_command(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    const auto config_path = options.config.empty() ? options.out_dir / "config.yaml" : options.config;
    const ScenarioConfig config = load_scenario(read_file(config_path), options);
    const Mesh mesh = build_mesh(config.mesh);
    std::ifstream in(options.out_dir / "trajectory.csv");
    if (!in) {
      throw ConfigError("--out-dir", "no trajectory.csv in '" + options.out_dir.string() + "'");
    }
    Trajectory traj = read_trajectory_csv(in, mesh.num_cells());
    if (static_cast<int>(traj.num_steps()) != config.num_steps()) {
      throw ConfigError("trajectory.csv", "has " + std::to_string(traj.num_steps()) + " steps, the scenario " +
                                              std::to_string(config.num_steps()));
    }
    traj.dt = config.solver.dt;
    for (std::size_t n = 1; n < traj.states.size(); ++n) {
      VectorXd c(traj.states[n].S.size());
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        c[i] = config.kinetics.eval(traj.states[n].S[i]);
      }
      traj.reaction.push_back(std::move(c));
    }
    const DiagnosticsReport report = diagnose(mesh, traj, config);
    write_summary(out, report, config);
    report_failures(report, err);
    return report.pass() ? kOk : kInvariantFailure;
  });
}

}  // namespace bioreactor::app
