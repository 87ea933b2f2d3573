#include "bioreactor/timestepping.hpp"

#include <cmath>
#include <string>

#include "bioreactor/error.hpp"

namespace bioreactor {

namespace {

double weighted_norm(const VectorXd& volumes, const VectorXd& u) {
  return std::sqrt(volumes.dot(u.cwiseAbs2()));
}

VectorXd reaction_field(const GrowthRateModel& mu, const VectorXd& z) {
  VectorXd c(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    c[i] = mu.eval(z[i]);
  }
  return c;
}

bool bitwise_equal(const VectorXd& a, const VectorXd& b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) {
      return false;
    }
  }
  return true;
}

/// Transport part of one step, reused across fixed-point iterations.
struct StepSystem {
  TransportOperator substrate;
  TransportOperator biomass;

  StepSystem(const Mesh& mesh, const TransportModel& model, double t, const ManufacturedForcing* forcing)
      : substrate(assemble_species(mesh, model, Species::Substrate, t)),
        biomass(assemble_species(mesh, model, Species::Biomass, t)) {
    if (forcing != nullptr) {
      add_manufactured_forcing(substrate, mesh, *forcing, Species::Substrate);
      add_manufactured_forcing(biomass, mesh, *forcing, Species::Biomass);
    }
  }

  /// `guess` seeds the Krylov iteration; an iterate that already meets the
  /// tolerance comes back unchanged, so fixed-point updates can reach zero.
  State solve(const State& state, const VectorXd& c, double dt, const LinearSolver& solver,
              LinearSolveReport& report, const State* guess = nullptr) const {
    const CoupledOperator op = couple(substrate, biomass, c);
    const Eigen::Index n = state.S.size();
    SparseMatrix identity(2 * n, 2 * n);
    identity.setIdentity();
    const SparseMatrix a = identity - dt * op.matrix;
    VectorXd rhs(2 * n);
    rhs << state.S, state.B;
    VectorXd x(2 * n);
    if (guess != nullptr) {
      x << guess->S, guess->B;
    } else {
      x = rhs;
    }
    rhs += dt * op.source;
    report = solver.solve(a, rhs, x);
    return State{state.t + dt, x.head(n), x.tail(n)};
  }
};

void check_step_inputs(const State& state, const VectorXd& c, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("solver.dt", "must be positive and finite");
  }
  if (!c.allFinite()) {
    throw InvalidStateError("reaction field is not finite");
  }
  if (!state.S.allFinite() || !state.B.allFinite()) {
    throw InvalidStateError("state is not finite at t = " + std::to_string(state.t));
  }
}

}  // namespace

State initial_state(const Mesh& mesh, const ScenarioConfig& config) {
  return State{0.0, config.initial_substrate.on(mesh), config.initial_biomass.on(mesh)};
}

State step_linear(const Mesh& mesh, const ScenarioConfig& config, const State& state, const VectorXd& c, double dt,
                  LinearSolveReport* report, const ManufacturedForcing* forcing) {
  check_step_inputs(state, c, dt);
  const StepSystem system(mesh, config.transport, state.t + dt, forcing);
  const LinearSolver solver(config.solver.linear_tol, config.solver.linear_max_iter);
  LinearSolveReport local;
  State next = system.solve(state, c, dt, solver, local);
  if (report != nullptr) {
    *report = local;
  }
  return next;
}

NonlinearStep step_nonlinear(const Mesh& mesh, const ScenarioConfig& config, const State& state, double dt,
                             const SolverOptions& opts, const ManufacturedForcing* forcing, int step_index) {
  check_step_inputs(state, VectorXd::Zero(0), dt);
  const StepSystem system(mesh, config.transport, state.t + dt, forcing);
  const LinearSolver solver(opts.linear_tol, opts.linear_max_iter);
  const VectorXd volumes = cell_volumes(mesh);

  NonlinearStep out;
  VectorXd z = state.S;
  VectorXd c = reaction_field(config.kinetics, z);
  for (int k = 1; k <= opts.picard_max_iter; ++k) {
    LinearSolveReport report;
    try {
      const State previous = out.state;
      out.state = system.solve(state, c, dt, solver, report, k > 1 ? &previous : nullptr);
    } catch (const SolverError& e) {
      throw SolverError(e.what(), e.history(), step_index);
    }
    out.record.linear_iterations += report.iterations;
    out.record.linear_residual = std::max(out.record.linear_residual, report.relative_residual);
    out.record.picard_iterations = k;
    out.c = c;

    const VectorXd z_next = z + opts.picard_damping * (out.state.S - z);
    const double update = weighted_norm(volumes, z_next - z);
    const double scale = weighted_norm(volumes, z_next);
    out.record.picard_history.push_back(scale > 0.0 ? update / scale : update);

    VectorXd c_next = reaction_field(config.kinetics, z_next);
    if (bitwise_equal(c_next, c) || update <= opts.picard_tol * scale) {
      return out;
    }
    z = z_next;
    c = std::move(c_next);
  }
  throw SolverError("fixed-point iteration did not converge in " + std::to_string(opts.picard_max_iter) +
                        " iterations at t = " + std::to_string(state.t + dt),
                    out.record.picard_history, step_index);
}

Trajectory constant_guess(const Mesh& mesh, const ScenarioConfig& config, double z) {
  Trajectory guess;
  guess.dt = config.solver.dt;
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  const int steps = config.num_steps();
  for (int k = 0; k <= steps; ++k) {
    guess.states.push_back(State{k * guess.dt, VectorXd::Constant(n, z), VectorXd::Zero(n)});
  }
  guess.steps.resize(static_cast<std::size_t>(steps));
  return guess;
}

double space_time_norm(const VectorXd& volumes, const std::vector<VectorXd>& fields, double dt) {
  double sum = 0.0;
  for (std::size_t k = 1; k < fields.size(); ++k) {
    sum += volumes.dot(fields[k].cwiseAbs2());
  }
  return std::sqrt(dt * sum);
}

GlobalSolve solve_schauder_global(const Mesh& mesh, const ScenarioConfig& config, const Trajectory& guess,
                                  const SolverOptions& opts, const ManufacturedForcing* forcing) {
  const int steps = config.num_steps();
  const double dt = opts.dt;
  if (static_cast<int>(guess.states.size()) != steps + 1) {
    throw ConfigError("guess", "must cover the full time grid (" + std::to_string(steps + 1) + " levels)");
  }
  const VectorXd volumes = cell_volumes(mesh);
  const LinearSolver solver(opts.linear_tol, opts.linear_max_iter);

  std::vector<StepSystem> systems;
  systems.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    systems.emplace_back(mesh, config.transport, (k + 1) * dt, forcing);
  }

  const State start = initial_state(mesh, config);
  std::vector<VectorXd> z(static_cast<std::size_t>(steps) + 1);
  std::vector<VectorXd> c(static_cast<std::size_t>(steps));
  z[0] = start.S;
  for (int k = 1; k <= steps; ++k) {
    z[static_cast<std::size_t>(k)] = guess.states[static_cast<std::size_t>(k)].S;
  }
  for (int k = 0; k < steps; ++k) {
    c[static_cast<std::size_t>(k)] = reaction_field(config.kinetics, z[static_cast<std::size_t>(k) + 1]);
  }

  GlobalSolve out;
  Trajectory last;
  for (int outer = 1; outer <= opts.picard_max_iter; ++outer) {
    Trajectory traj;
    traj.dt = dt;
    traj.states.push_back(start);
    for (int k = 0; k < steps; ++k) {
      LinearSolveReport report;
      const auto ks = static_cast<std::size_t>(k);
      try {
        const State* previous = outer > 1 ? &last.states[ks + 1] : nullptr;
        traj.states.push_back(systems[ks].solve(traj.states.back(), c[ks], dt, solver, report, previous));
      } catch (const SolverError& e) {
        throw SolverError(e.what(), e.history(), k);
      }
      traj.steps.push_back(StepRecord{outer, report.iterations, report.relative_residual, {}});
      traj.reaction.push_back(c[ks]);
    }

    std::vector<VectorXd> z_next(z.size());
    std::vector<VectorXd> diff(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
      z_next[k] = z[k] + opts.picard_damping * (traj.states[k].S - z[k]);
      diff[k] = z_next[k] - z[k];
    }
    const double update = space_time_norm(volumes, diff, dt);
    const double scale = space_time_norm(volumes, z_next, dt);
    out.history.push_back(scale > 0.0 ? update / scale : update);
    out.outer_iterations = outer;

    bool unchanged = true;
    std::vector<VectorXd> c_next(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
      c_next[k] = reaction_field(config.kinetics, z_next[k + 1]);
      unchanged = unchanged && bitwise_equal(c_next[k], c[k]);
    }
    if (unchanged || update <= opts.picard_tol * scale) {
      for (auto& record : traj.steps) {
        record.picard_history = out.history;
      }
      out.trajectory = std::move(traj);
      return out;
    }
    last = std::move(traj);
    z = std::move(z_next);
    c = std::move(c_next);
  }
  throw SolverError("space-time fixed-point iteration did not converge in " +
                        std::to_string(opts.picard_max_iter) + " iterations",
                    out.history);
}

Trajectory integrate(const Mesh& mesh, const ScenarioConfig& config, const ManufacturedForcing* forcing) {
  const auto& opts = config.solver;
  if (opts.nonlinear_mode == NonlinearMode::SchauderGlobal) {
    const State start = initial_state(mesh, config);
    Trajectory guess = constant_guess(mesh, config, 0.0);
    for (auto& s : guess.states) {
      s.S = start.S;
    }
    return solve_schauder_global(mesh, config, guess, opts, forcing).trajectory;
  }
  Trajectory traj;
  traj.dt = opts.dt;
  traj.states.push_back(initial_state(mesh, config));
  const int steps = config.num_steps();
  for (int k = 0; k < steps; ++k) {
    NonlinearStep step = step_nonlinear(mesh, config, traj.states.back(), opts.dt, opts, forcing, k);
    step.state.t = (k + 1) * opts.dt;
    traj.states.push_back(std::move(step.state));
    traj.steps.push_back(std::move(step.record));
    traj.reaction.push_back(std::move(step.c));
  }
  return traj;
}

}  // namespace bioreactor
