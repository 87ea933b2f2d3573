#include <cmath>

#include "bioreactor/error.hpp"
#include "bioreactor/timestepping.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bioreactor;

namespace {

ScenarioConfig small_config(int n = 6) {
  ScenarioConfig config;
  config.mesh = MeshSpec{MeshMode::Axial1D, 0.5, 0.1, n, 1};
  config.transport.diffusion_substrate = 0.01;
  config.transport.diffusion_biomass = 0.005;
  config.transport.flow = FlowField::constant(0.1);
  config.transport.inlet = InletSchedule::constant(1.0);
  config.kinetics = GrowthRateModel::monod(1.0, 0.5);
  config.initial_substrate.value = 0.3;
  config.initial_biomass.value = 0.2;
  config.final_time = 0.5;
  config.solver.dt = 0.05;
  return config;
}

double l2(const VectorXd& v) { return v.norm(); }

}  // namespace

TEST_CASE("constant state is kept by pure diffusion") {
  ScenarioConfig config = small_config();
  config.transport.flow = FlowField::constant(0.0);
  config.kinetics = GrowthRateModel::zero();
  const Mesh mesh = build_mesh(config.mesh);
  const State s0 = initial_state(mesh, config);
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  const State s1 = step_linear(mesh, config, s0, VectorXd::Zero(n), 0.1);
  CHECK((s1.S - s0.S).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((s1.B - s0.B).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s1.t == doctest::Approx(0.1));
}

TEST_CASE("single cell implicit step matches hand algebra") {
  ScenarioConfig config = small_config(1);
  config.transport.flow = FlowField::constant(0.0);
  const Mesh mesh = build_mesh(config.mesh);
  const State s0 = initial_state(mesh, config);
  const double kappa = 0.8;
  const double dt = 0.25;
  const State s1 = step_linear(mesh, config, s0, VectorXd::Constant(1, kappa), dt);
  const double b1 = 0.2 / (1.0 - dt * kappa);
  CHECK(s1.B(0) == doctest::Approx(b1).epsilon(1e-14));
  CHECK(s1.S(0) == doctest::Approx(0.3 - dt * kappa * b1).epsilon(1e-14));
}

TEST_CASE("three-cell linear trajectory converges to the matrix exponential at first order") {
  ScenarioConfig config = small_config(3);
  config.transport.inlet = InletSchedule::constant(2.0);
  const Mesh mesh = build_mesh(config.mesh);
  const VectorXd c = VectorXd::Constant(3, 0.4);
  const auto dense = testing::dense_coupled(mesh, config, c, 0.0);
  const State s0 = initial_state(mesh, config);
  Eigen::VectorXd u0(6);
  u0 << s0.S, s0.B;
  const double T = 1.0;
  const Eigen::VectorXd exact = testing::linear_exact(dense.matrix, dense.source, u0, T);

  std::vector<double> errors;
  for (int steps : {10, 20, 40, 80}) {
    const double dt = T / steps;
    State s = s0;
    for (int k = 0; k < steps; ++k) s = step_linear(mesh, config, s, c, dt);
    Eigen::VectorXd u(6);
    u << s.S, s.B;
    errors.push_back((u - exact).cwiseAbs().maxCoeff());
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    CHECK(order == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("zero kinetics needs a single Picard iteration") {
  ScenarioConfig config = small_config();
  config.kinetics = GrowthRateModel::zero();
  const Mesh mesh = build_mesh(config.mesh);
  const State s0 = initial_state(mesh, config);
  const auto step = step_nonlinear(mesh, config, s0, 0.05, config.solver);
  CHECK(step.record.picard_iterations == 1);
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  const State lin = step_linear(mesh, config, s0, VectorXd::Zero(n), 0.05);
  CHECK(step.state.S == lin.S);
  CHECK(step.state.B == lin.B);
}

TEST_CASE("zero substrate produces no reaction") {
  ScenarioConfig config = small_config();
  config.transport.inlet = InletSchedule::constant(0.0);
  config.initial_substrate.value = 0.0;
  config.initial_biomass.value = std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const Mesh mesh = build_mesh(config.mesh);
  const Trajectory traj = integrate(mesh, config);
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  State transport_only = traj.initial();
  for (std::size_t k = 0; k < traj.num_steps(); ++k) {
    transport_only = step_linear(mesh, config, transport_only, VectorXd::Zero(n), traj.dt);
  }
  CHECK(traj.final().S.cwiseAbs().maxCoeff() == 0.0);
  CHECK((traj.final().B - transport_only.B).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("Picard step agrees with a dense Newton solve") {
  for (auto kinetics : {GrowthRateModel::monod(1.0, 0.5), GrowthRateModel::haldane(1.5, 0.4, 2.0)}) {
    ScenarioConfig config = small_config(5);
    config.kinetics = kinetics;
    config.initial_substrate.value = std::vector<double>{0.1, 0.5, 1.0, 0.2, 0.0};
    config.initial_biomass.value = std::vector<double>{0.5, 0.4, 0.3, 0.2, 0.1};
    const Mesh mesh = build_mesh(config.mesh);
    const State s0 = initial_state(mesh, config);
    const double dt = 0.1;
    const auto picard = step_nonlinear(mesh, config, s0, dt, config.solver);
    const State newton = testing::newton_step(mesh, config, s0, dt);
    const double diff = std::sqrt((picard.state.S - newton.S).squaredNorm() + (picard.state.B - newton.B).squaredNorm());
    CHECK(diff <= 1e-8);
    // The update norms do not grow after the first iteration on this case.
    const auto& h = picard.record.picard_history;
    for (std::size_t i = 2; i < h.size(); ++i) CHECK(h[i] <= h[i - 1] * (1.0 + 1e-9) + 1e-15);
  }
}

TEST_CASE("global fixed point agrees with per-step Picard") {
  ScenarioConfig config = small_config();
  const Mesh mesh = build_mesh(config.mesh);
  const Trajectory picard = integrate(mesh, config);
  const auto global = solve_schauder_global(mesh, config, constant_guess(mesh, config, 0.0), config.solver);
  REQUIRE(global.trajectory.states.size() == picard.states.size());
  const auto vol = cell_volumes(mesh);
  std::vector<VectorXd> diff;
  std::vector<VectorXd> ref;
  for (std::size_t k = 0; k < picard.states.size(); ++k) {
    diff.push_back(global.trajectory.states[k].S - picard.states[k].S);
    ref.push_back(picard.states[k].S);
  }
  CHECK(space_time_norm(vol, diff, picard.dt) <= 1e-10 * space_time_norm(vol, ref, picard.dt));

  ScenarioConfig linear = config;
  linear.kinetics = GrowthRateModel::zero();
  const auto one = solve_schauder_global(mesh, linear, constant_guess(mesh, linear, 0.0), linear.solver);
  CHECK(one.outer_iterations == 1);
}

TEST_CASE("integrate dispatches on the nonlinear mode") {
  ScenarioConfig config = small_config();
  config.solver.nonlinear_mode = NonlinearMode::SchauderGlobal;
  const Mesh mesh = build_mesh(config.mesh);
  const Trajectory a = integrate(mesh, config);
  config.solver.nonlinear_mode = NonlinearMode::PerStepPicard;
  const Trajectory b = integrate(mesh, config);
  CHECK(l2(a.final().S - b.final().S) <= 1e-10);
}

TEST_CASE("trajectory layout") {
  ScenarioConfig config = small_config();
  const Mesh mesh = build_mesh(config.mesh);
  const Trajectory traj = integrate(mesh, config);
  CHECK(traj.num_steps() == 10);
  CHECK(traj.states.size() == 11);
  CHECK(traj.reaction.size() == 10);
  CHECK(traj.final().t == doctest::Approx(0.5));
  // reaction[n] is mu evaluated at the end-of-step substrate.
  for (Eigen::Index i = 0; i < traj.reaction[3].size(); ++i) {
    CHECK(traj.reaction[3](i) == doctest::Approx(config.kinetics.eval(traj.states[4].S(i))).epsilon(1e-10));
  }

  config.final_time = 0.0;
  const Trajectory empty = integrate(mesh, config);
  CHECK(empty.states.size() == 1);
  CHECK(empty.num_steps() == 0);
}

TEST_CASE("runs are bitwise deterministic") {
  ScenarioConfig config = small_config();
  config.mesh = MeshSpec{MeshMode::Axisymmetric2D, 0.5, 0.1, 6, 3};
  config.kinetics = GrowthRateModel::capped_linear(2.0, 0.9);
  const Mesh mesh = build_mesh(config.mesh);
  const Trajectory a = integrate(mesh, config);
  const Trajectory b = integrate(mesh, config);
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    CHECK(a.states[k].S == b.states[k].S);
    CHECK(a.states[k].B == b.states[k].B);
  }
}

TEST_CASE("Picard failure is reported with its history") {
  ScenarioConfig config = small_config();
  config.solver.picard_max_iter = 1;
  const Mesh mesh = build_mesh(config.mesh);
  try {
    integrate(mesh, config);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.step() == 0);
    CHECK_FALSE(e.history().empty());
  }
}

TEST_CASE("damped iteration reaches the same state") {
  ScenarioConfig config = small_config();
  const Mesh mesh = build_mesh(config.mesh);
  const State s0 = initial_state(mesh, config);
  SolverOptions damped = config.solver;
  damped.picard_damping = 0.5;
  const auto a = step_nonlinear(mesh, config, s0, 0.05, config.solver);
  const auto b = step_nonlinear(mesh, config, s0, 0.05, damped);
  CHECK(l2(a.state.S - b.state.S) <= 1e-10);
  CHECK(b.record.picard_iterations > a.record.picard_iterations);
}

TEST_CASE("fixed-point iterations converge on the Krylov path") {
  // 2 x 64 x 32 unknowns exceed the direct-solver limit; the iteration must
  // still reach picard_tol rather than stall at the linear tolerance.
  ScenarioConfig config = small_config();
  config.mesh = MeshSpec{MeshMode::Axisymmetric2D, 0.5, 0.1, 64, 32};
  config.final_time = 0.1;
  const Mesh mesh = build_mesh(config.mesh);
  const State s0 = initial_state(mesh, config);
  const auto step = step_nonlinear(mesh, config, s0, config.solver.dt, config.solver);
  CHECK(step.record.picard_iterations < 20);
  CHECK(step.record.linear_iterations > step.record.picard_iterations);
  CHECK(step.state.S.minCoeff() >= -1e-12);

  const auto global = solve_schauder_global(mesh, config, constant_guess(mesh, config, 0.0), config.solver);
  CHECK(global.outer_iterations < 30);
  const Trajectory picard = integrate(mesh, config);
  CHECK((global.trajectory.final().S - picard.final().S).cwiseAbs().maxCoeff() <= 1e-8);
}
