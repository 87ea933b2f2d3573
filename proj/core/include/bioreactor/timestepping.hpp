#pragma once

#include <vector>

#include "bioreactor/discretization.hpp"
#include "bioreactor/linear_solver.hpp"
#include "bioreactor/scenario.hpp"

namespace bioreactor {

struct State {
  double t = 0.0;  // s
  VectorXd S;      // mol/m^3 per cell
  VectorXd B;      // mol/m^3 per cell
};

/// Solver metadata of one time step.
struct StepRecord {
  int picard_iterations = 0;
  int linear_iterations = 0;
  double linear_residual = 0.0;
  /// Relative update norm after each fixed-point iteration.
  std::vector<double> picard_history;
};

/**
 * Time-ordered states on the uniform grid t_n = n * dt.
 *
 * steps[n] and reaction[n] belong to the step from t_n to t_{n+1}; reaction[n]
 * is the field c = mu(S) used in the implicit system of that step.
 */
struct Trajectory {
  double dt = 0.0;
  std::vector<State> states;
  std::vector<StepRecord> steps;
  std::vector<VectorXd> reaction;

  std::size_t num_steps() const noexcept { return steps.size(); }
  const State& initial() const { return states.front(); }
  const State& final() const { return states.back(); }
};

State initial_state(const Mesh& mesh, const ScenarioConfig& config);

/**
 * One implicit Euler step of the linear system with a frozen reaction field:
 * (I - dt M(t + dt)) u = u_n + dt source(t + dt).
 */
State step_linear(const Mesh& mesh, const ScenarioConfig& config, const State& state, const VectorXd& c, double dt,
                  LinearSolveReport* report = nullptr, const ManufacturedForcing* forcing = nullptr);

struct NonlinearStep {
  State state;
  StepRecord record;
  VectorXd c;
};

/**
 * Implicit Euler step of the nonlinear system by fixed-point iteration on the
 * substrate: c = mu(Z), solve the linear step, relax Z toward the new S.
 * Stops when the relative L2 update drops to picard_tol or when mu(Z) no
 * longer changes. Throws SolverError after picard_max_iter iterations.
 */
NonlinearStep step_nonlinear(const Mesh& mesh, const ScenarioConfig& config, const State& state, double dt,
                             const SolverOptions& opts, const ManufacturedForcing* forcing = nullptr,
                             int step_index = -1);

/// Trajectory whose substrate is the constant `z` at every time level.
Trajectory constant_guess(const Mesh& mesh, const ScenarioConfig& config, double z);

struct GlobalSolve {
  Trajectory trajectory;
  int outer_iterations = 0;
  /// Relative space-time L2 update per outer iteration.
  std::vector<double> history;
};

/**
 * Space-time fixed-point iteration Z -> S_Z: freeze c = mu(Z) on the whole
 * time grid, solve the linear problem step by step, repeat until the relative
 * L2(0, T; L2) update drops to picard_tol.
 */
GlobalSolve solve_schauder_global(const Mesh& mesh, const ScenarioConfig& config, const Trajectory& guess,
                                  const SolverOptions& opts, const ManufacturedForcing* forcing = nullptr);

/// Runs the configured nonlinear mode over [0, T].
Trajectory integrate(const Mesh& mesh, const ScenarioConfig& config, const ManufacturedForcing* forcing = nullptr);

/// Discrete L2(0, T; L2) norm: sqrt(dt * sum_{n >= 1} sum_i V_i u_i^2).
double space_time_norm(const VectorXd& volumes, const std::vector<VectorXd>& fields, double dt);

}  // namespace bioreactor
