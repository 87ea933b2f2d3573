#include "bioreactor/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bioreactor/error.hpp"

namespace bioreactor {

std::string_view to_string(NonlinearMode mode) {
  return mode == NonlinearMode::PerStepPicard ? "per_step_picard" : "schauder_global";
}

VectorXd InitialField::on(const Mesh& mesh) const {
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  if (const auto* uniform = std::get_if<double>(&value)) {
    return VectorXd::Constant(n, *uniform);
  }
  const auto& per_cell = std::get<std::vector<double>>(value);
  if (static_cast<Eigen::Index>(per_cell.size()) != n) {
    throw ConfigError("initial", "per-cell list has " + std::to_string(per_cell.size()) + " entries, mesh has " +
                                     std::to_string(n) + " cells");
  }
  return Eigen::Map<const VectorXd>(per_cell.data(), n);
}

double InitialField::sup_abs() const {
  if (const auto* uniform = std::get_if<double>(&value)) {
    return std::abs(*uniform);
  }
  double m = 0.0;
  for (double v : std::get<std::vector<double>>(value)) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

double InitialField::min() const {
  if (const auto* uniform = std::get_if<double>(&value)) {
    return *uniform;
  }
  const auto& v = std::get<std::vector<double>>(value);
  return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
}

int ScenarioConfig::num_steps() const { return static_cast<int>(std::llround(final_time / solver.dt)); }

namespace {

void check_initial(const InitialField& field, const Mesh& mesh, const char* name, bool require_nonnegative) {
  try {
    const VectorXd v = field.on(mesh);
    if (!v.allFinite()) {
      throw ConfigError(std::string("initial.") + name, "values must be finite");
    }
  } catch (const ConfigError& e) {
    if (e.field() == "initial") {
      throw ConfigError(std::string("initial.") + name, e.constraint());
    }
    throw;
  }
  if (require_nonnegative && field.min() < 0.0) {
    throw ConfigError(std::string("initial.") + name,
                      "must be nonnegative when invariant checks are on (nonnegative initial data hypothesis)");
  }
}

}  // namespace

void validate(const ScenarioConfig& config) {
  validate(config.mesh);
  const Mesh mesh(config.mesh);
  const auto& tr = config.transport;
  if (!(tr.diffusion_substrate > 0.0) || !std::isfinite(tr.diffusion_substrate)) {
    throw ConfigError("transport.diffusion_substrate",
                      "must be positive (existence requires strictly positive diffusion coefficients D_S, D_B)");
  }
  if (!(tr.diffusion_biomass > 0.0) || !std::isfinite(tr.diffusion_biomass)) {
    throw ConfigError("transport.diffusion_biomass",
                      "must be positive (existence requires strictly positive diffusion coefficients D_S, D_B)");
  }
  if (tr.strict && tr.flow.sup_negative_part() > 0.0) {
    throw ConfigError("flow", "flow speed Q must be nonnegative (nonnegative flow hypothesis)");
  }
  if (!(config.final_time >= 0.0) || !std::isfinite(config.final_time)) {
    throw ConfigError("time.final", "must be nonnegative and finite");
  }
  const auto& s = config.solver;
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) {
    throw ConfigError("solver.dt", "must be positive");
  }
  const double ratio = config.final_time / s.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("solver.dt", "time.final must be an integer multiple of solver.dt");
  }
  const double growth = s.dt * config.kinetics.sup_norm();
  if (!(growth < 1.0)) {
    std::ostringstream msg;
    msg << "dt * mu_sup = " << growth
        << " must be < 1 (implicit reaction step must keep the biomass operator an M-matrix; positivity constraint)";
    throw ConfigError("solver.dt", msg.str());
  }
  if (!(s.linear_tol > 0.0)) throw ConfigError("solver.linear_tol", "must be positive");
  if (!(s.picard_tol > 0.0)) throw ConfigError("solver.picard_tol", "must be positive");
  if (s.linear_max_iter < 1) throw ConfigError("solver.linear_max_iter", "must be at least 1");
  if (s.picard_max_iter < 1) throw ConfigError("solver.picard_max_iter", "must be at least 1");
  if (!(s.picard_damping > 0.0 && s.picard_damping <= 1.0)) {
    throw ConfigError("solver.picard_damping", "must lie in (0, 1]");
  }
  check_initial(config.initial_substrate, mesh, "substrate", config.invariant_checks);
  check_initial(config.initial_biomass, mesh, "biomass", config.invariant_checks);
  if (config.invariant_checks && tr.inlet.min(config.final_time) < 0.0) {
    throw ConfigError("inlet.schedule",
                      "must be nonnegative when invariant checks are on (nonnegative inlet concentration hypothesis)");
  }
  if (config.output.snapshots < 0) {
    throw ConfigError("output.snapshots", "must be nonnegative");
  }
}

}  // namespace bioreactor
