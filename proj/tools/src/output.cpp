#include "app.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "bioreactor/config.hpp"
#include "bioreactor/error.hpp"
#include "bioreactor/format.hpp"

namespace bioreactor::app {

namespace {

/// Snapshot time for file names, rounded to 12 significant digits.
std::string time_label(double t) {
  std::array<char, 32> buffer{};
  const auto r = std::to_chars(buffer.data(), buffer.data() + buffer.size(), t, std::chars_format::general, 12);
  return std::string(buffer.data(), r.ptr);
}

}  // namespace

std::vector<std::size_t> snapshot_levels(std::size_t num_steps, int count) {
  std::set<std::size_t> levels{0, num_steps};
  const auto parts = static_cast<std::size_t>(std::max(count, 0)) + 1;
  for (std::size_t k = 1; k < parts; ++k) {
    levels.insert((k * num_steps + parts / 2) / parts);
  }
  return {levels.begin(), levels.end()};
}

void write_fields_csv(std::ostream& os, const Mesh& mesh, const State& state) {
  os << "cell,z,r,S,B\n";
  for (std::size_t i = 0; i < mesh.num_cells(); ++i) {
    const auto& c = mesh.cells()[i].center;
    const auto k = static_cast<Eigen::Index>(i);
    os << i << ',' << format_double(c.z) << ',' << format_double(c.r) << ',' << format_double(state.S[k]) << ','
       << format_double(state.B[k]) << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "level,t,cell,S,B\n";
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const State& s = traj.states[n];
    for (Eigen::Index i = 0; i < s.S.size(); ++i) {
      os << n << ',' << format_double(s.t) << ',' << i << ',' << format_double(s.S[i]) << ','
         << format_double(s.B[i]) << '\n';
    }
  }
}

Trajectory read_trajectory_csv(std::istream& is, std::size_t num_cells) {
  Trajectory traj;
  std::string line;
  if (!std::getline(is, line) || line.rfind("level,t,cell,S,B", 0) != 0) {
    throw ConfigError("trajectory.csv", "missing header 'level,t,cell,S,B'");
  }
  const auto n = static_cast<Eigen::Index>(num_cells);
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    row.imbue(std::locale::classic());
    std::size_t level = 0;
    Eigen::Index cell = 0;
    double t = 0.0, s = 0.0, b = 0.0;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(row >> level >> c1 >> t >> c2 >> cell >> c3 >> s >> c4 >> b) || c1 != ',' || c2 != ',' || c3 != ',' ||
        c4 != ',' || cell < 0 || cell >= n || level > traj.states.size()) {
      throw ConfigError("trajectory.csv", "malformed row at line " + std::to_string(line_no));
    }
    if (level == traj.states.size()) {
      traj.states.push_back(State{t, VectorXd::Zero(n), VectorXd::Zero(n)});
    }
    traj.states[level].S[cell] = s;
    traj.states[level].B[cell] = b;
  }
  if (traj.states.empty()) {
    throw ConfigError("trajectory.csv", "no states");
  }
  traj.dt = traj.states.size() > 1 ? traj.states[1].t - traj.states[0].t : 0.0;
  traj.steps.resize(traj.states.size() - 1);
  return traj;
}

void write_residual_log(std::ostream& os, const Trajectory& traj) {
  os << "step,t,picard_iterations,linear_iterations,linear_residual,picard_updates\n";
  for (std::size_t n = 0; n < traj.steps.size(); ++n) {
    const auto& r = traj.steps[n];
    os << n + 1 << ',' << format_double(traj.states[n + 1].t) << ',' << r.picard_iterations << ','
       << r.linear_iterations << ',' << format_double(r.linear_residual) << ',';
    for (std::size_t k = 0; k < r.picard_history.size(); ++k) {
      os << (k == 0 ? "" : ";") << format_double(r.picard_history[k]);
    }
    os << '\n';
  }
}

double outlet_mean(const Mesh& mesh, const VectorXd& u) {
  double area = 0.0;
  double sum = 0.0;
  for (const auto& f : mesh.boundary_faces()) {
    if (f.tag == BoundaryTag::Outlet) {
      area += f.area;
      sum += f.area * u[static_cast<Eigen::Index>(f.owner)];
    }
  }
  return area > 0.0 ? sum / area : 0.0;
}

void write_run_outputs(const std::filesystem::path& dir, const ScenarioConfig& config, const SimulationResult& result,
                       bool verbose) {
  std::filesystem::create_directories(dir);
  auto open = [&dir](const std::string& name) {
    std::ofstream os(dir / name);
    if (!os) {
      throw Error("cannot write " + (dir / name).string());
    }
    return os;
  };
  const auto& traj = result.trajectory;
  for (std::size_t level : snapshot_levels(traj.num_steps(), config.output.snapshots)) {
    auto os = open("fields_" + time_label(traj.states[level].t) + ".csv");
    write_fields_csv(os, result.mesh, traj.states[level]);
  }
  {
    auto os = open("diagnostics.csv");
    write_diagnostics_csv(os, result.report);
  }
  {
    auto os = open("summary.txt");
    write_summary(os, result.report, config);
  }
  {
    auto os = open("trajectory.csv");
    write_trajectory_csv(os, traj);
  }
  {
    auto os = open("config.yaml");
    os << serialize_config(config);
  }
  if (verbose) {
    auto os = open("residuals.csv");
    write_residual_log(os, traj);
  }
}

}  // namespace bioreactor::app
