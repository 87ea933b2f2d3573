#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bioreactor/analysis.hpp"

namespace bioreactor::app {

enum ExitCode : int { kOk = 0, kConfigError = 1, kInvariantFailure = 2, kSolverFailure = 3 };

struct CommonOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir = "out";
  bool verbose = false;
  /// Overrides the `checks` key of the scenario when set.
  std::optional<bool> checks;
  int threads = 1;
};

/// Parses argv and dispatches to a subcommand; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_command(const CommonOptions& options, std::ostream& out, std::ostream& err);
int sweep_command(const CommonOptions& options, std::ostream& out, std::ostream& err);
int mms_command(const CommonOptions& options, const std::string& which, std::ostream& out, std::ostream& err);
int check_command(const CommonOptions& options, std::ostream& out, std::ostream& err);

// Output helpers shared by the commands.

/// Time levels written as snapshots: `count` evenly spaced plus t = 0 and t = T.
std::vector<std::size_t> snapshot_levels(std::size_t num_steps, int count);

void write_fields_csv(std::ostream& os, const Mesh& mesh, const State& state);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is, std::size_t num_cells);
void write_residual_log(std::ostream& os, const Trajectory& traj);

/// Area-weighted mean of a cell field over the outlet faces.
double outlet_mean(const Mesh& mesh, const VectorXd& u);

/// Writes all run outputs into `dir` (created if needed).
void write_run_outputs(const std::filesystem::path& dir, const ScenarioConfig& config, const SimulationResult& result,
                       bool verbose);

}  // namespace bioreactor::app
