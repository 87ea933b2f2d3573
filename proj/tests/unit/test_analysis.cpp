#include <algorithm>
#include <cmath>
#include <sstream>

#include "bioreactor/analysis.hpp"
#include "doctest.h"
#include "fuzz.hpp"

using namespace bioreactor;

namespace {

ScenarioConfig base_config() {
  ScenarioConfig config;
  config.mesh = MeshSpec{MeshMode::Axial1D, 0.5, 0.1, 12, 1};
  config.transport.diffusion_substrate = 0.01;
  config.transport.diffusion_biomass = 0.005;
  config.transport.flow = FlowField::constant(0.1);
  config.transport.inlet = InletSchedule::constant(1.0);
  config.kinetics = GrowthRateModel::monod(1.0, 0.5);
  config.initial_substrate.value = 0.2;
  config.initial_biomass.value = 0.1;
  config.final_time = 1.0;
  config.solver.dt = 0.05;
  return config;
}

ScenarioConfig high_peclet_central() {
  ScenarioConfig config = base_config();
  config.mesh = MeshSpec{MeshMode::Axial1D, 1.0, 0.1, 20, 1};
  config.transport.scheme = AdvectionScheme::Central;
  config.transport.diffusion_substrate = 5e-3;  // face Peclet Q h / D = 10
  config.transport.diffusion_biomass = 5e-3;
  config.transport.flow = FlowField::constant(1.0);
  config.kinetics = GrowthRateModel::zero();
  config.initial_substrate.value = 0.0;
  config.final_time = 0.5;
  config.solver.dt = 0.01;
  return config;
}

}  // namespace

TEST_CASE("zero data stays exactly zero") {
  ScenarioConfig config = base_config();
  config.initial_substrate.value = 0.0;
  config.initial_biomass.value = 0.0;
  config.transport.inlet = InletSchedule::constant(0.0);
  const auto result = simulate(config);
  CHECK(result.report.nonnegativity.min_S == 0.0);
  CHECK(result.report.nonnegativity.min_B == 0.0);
  CHECK(result.report.energy.substrate.lhs == 0.0);
  CHECK(result.report.energy.substrate.rhs == 0.0);
  CHECK(result.report.energy.biomass.lhs == 0.0);
  CHECK(result.report.energy.biomass.rhs == 0.0);
  CHECK(result.report.pass());
}

TEST_CASE("central fluxes at high Peclet report the undershoot") {
  const ScenarioConfig config = high_peclet_central();
  const auto result = simulate(config);
  const auto& nn = result.report.nonnegativity;
  // The biomass front leaving the reactor dips below zero; the substrate overshoots the feed.
  CHECK(nn.min_B < -nn.tolerance);
  CHECK(result.report.bounds.min_margin_S < 0.0);
  CHECK_FALSE(nn.pass);
  CHECK_FALSE(result.report.pass());
  bool named = false;
  for (const auto& f : result.report.failures()) named = named || f.find("nonnegativ") != std::string::npos;
  CHECK(named);

  ScenarioConfig upwind = config;
  upwind.transport.scheme = AdvectionScheme::Upwind;
  CHECK(simulate(upwind).report.nonnegativity.pass);
}

TEST_CASE("biomass bound without reaction or flow") {
  ScenarioConfig config = base_config();
  config.kinetics = GrowthRateModel::zero();
  config.transport.flow = FlowField::constant(0.0);
  config.initial_biomass.value = std::vector<double>{0.0, 0.1, 0.5, 0.9, 0.2, 0.0, 0.0, 0.3, 0.3, 0.3, 0.1, 0.0};
  const auto result = simulate(config);
  const auto& b = result.report.bounds;
  // At t = 0 the bound is attained; only the relative slack remains.
  CHECK(b.margin_B.front() == doctest::Approx(1e-8 * 0.9).epsilon(1e-6));
  CHECK(b.min_margin_B >= -1e-12);
  for (std::size_t k = 1; k < result.report.levels.size(); ++k) {
    CHECK(result.report.levels[k].max_B <= result.report.levels[k - 1].max_B + 1e-15);
  }
}

TEST_CASE("substrate bound with matching initial and feed values") {
  ScenarioConfig config = base_config();
  config.initial_substrate.value = 5.0;
  config.transport.inlet = InletSchedule::constant(5.0);
  const auto result = simulate(config);
  for (const auto& level : result.report.levels) CHECK(level.max_S <= 5.0 * (1.0 + 1e-12));
  CHECK(result.report.bounds.substrate_applicable);
  CHECK(result.report.bounds.min_margin_S >= 0.0);
}

TEST_CASE("implicit growth can exceed the exponential biomass bound") {
  // Saturated capped-linear kinetics in a closed reactor: B grows by exactly
  // 1 / (1 - dt cap) per step, faster than exp(cap dt).
  ScenarioConfig config = base_config();
  config.kinetics = GrowthRateModel::capped_linear(2.0, 0.8);
  config.transport.flow = FlowField::constant(0.0);
  config.initial_substrate.value = 10.0;
  config.initial_biomass.value = 0.1;
  config.solver.dt = 0.1;
  const auto result = simulate(config);
  const auto& b = result.report.bounds;
  CHECK(result.report.levels.back().max_B == doctest::Approx(0.1 / std::pow(0.92, 10)).epsilon(1e-10));
  CHECK(b.min_margin_B < 0.0);
  CHECK_FALSE(b.pass);
  CHECK(b.min_margin_B_implicit >= -1e-10);
  CHECK(result.report.nonnegativity.pass);
}

TEST_CASE("bounds are not asserted for axially varying flow") {
  ScenarioConfig config = base_config();
  config.transport.flow = FlowField(FlowField::AxiallyVarying{{0.0, 0.5}, {0.0}, {{0.05, 0.2}}});
  const auto result = simulate(config);
  CHECK_FALSE(result.report.bounds.substrate_applicable);
}

TEST_CASE("mass balance") {
  SUBCASE("closed reactor conserves S + B") {
    ScenarioConfig config = base_config();
    config.transport.flow = FlowField::constant(0.0);
    config.kinetics = GrowthRateModel::haldane(2.0, 0.3, 1.0);
    const auto result = simulate(config);
    const auto& total = result.report.mass.total;
    for (double m : total) CHECK(std::abs(m - total.front()) <= 1e-12 * total.front());
  }
  SUBCASE("no feed means moles only leave") {
    ScenarioConfig config = base_config();
    config.transport.inlet = InletSchedule::constant(0.0);
    const auto result = simulate(config);
    const auto& total = result.report.mass.total;
    for (std::size_t k = 1; k < total.size(); ++k) CHECK(total[k] <= total[k - 1] * (1.0 + 1e-14));
    CHECK(result.report.mass.pass);
  }
}

TEST_CASE("coercivity margin arithmetic") {
  ScenarioConfig config = base_config();
  CHECK(coercivity_margin(config, 2.0) == doctest::Approx(0.005 / 4.0));
  config.transport.diffusion_substrate = 1e-4;
  config.transport.diffusion_biomass = 1e-4;
  config.transport.flow = FlowField(FlowField::AxiallyVarying{{0.0, 1.0}, {0.0}, {{-1e-5, 0.3}}});
  CHECK(coercivity_margin(config, 2.0) == doctest::Approx(1.5e-5).epsilon(1e-12));
}

TEST_CASE("trace constant") {
  std::vector<double> estimates;
  for (int n : {8, 16, 32}) {
    const double ct = estimate_trace_constant(build_mesh(MeshSpec{MeshMode::Axial1D, 1.0, 1.0, n, 1}));
    CHECK(std::isfinite(ct));
    CHECK(ct > 0.0);
    estimates.push_back(ct);
  }
  // Successive refinements change the estimate by shrinking amounts.
  CHECK(std::abs(estimates[2] - estimates[1]) < std::abs(estimates[1] - estimates[0]));
  CHECK(estimate_trace_constant(build_mesh(MeshSpec{MeshMode::Axisymmetric2D, 0.5, 0.2, 8, 4})) > 0.0);
}

TEST_CASE("bilinear constants") {
  ScenarioConfig config = base_config();
  config.transport.diffusion_substrate = 1.0;
  config.transport.flow = FlowField::constant(2.0);
  auto c = bilinear_constants_report(config, 1.0);
  CHECK(c.substrate.k == doctest::Approx(5.0));
  CHECK(c.substrate.epsilon == doctest::Approx(1.0));
  CHECK(c.substrate.alpha1 == doctest::Approx(0.5));
  CHECK(c.substrate.delta == doctest::Approx(2e-3));
  CHECK(c.substrate.lambda == doctest::Approx(2.002));

  config.transport.flow = FlowField::constant(0.0);
  c = bilinear_constants_report(config, 1.7);
  CHECK(c.substrate.k == 1.0);
  CHECK(c.substrate.alpha1 == 1.0);
  CHECK(c.substrate.lambda == c.substrate.delta);
}

TEST_CASE("bilinear inequalities hold for random field pairs") {
  for (const auto& spec : {MeshSpec{MeshMode::Axial1D, 0.5, 0.1, 16, 1}, MeshSpec{MeshMode::Axisymmetric2D, 1, 0.3, 6, 4}}) {
    ScenarioConfig config = base_config();
    config.mesh = spec;
    config.transport.flow = FlowField::ramp(0.05, 0.4, 0.5);
    const Mesh mesh = build_mesh(spec);
    const auto constants = bilinear_constants_report(config, estimate_trace_constant(mesh));
    const auto w = bilinear_witness(mesh, config, constants, 1000, 5);
    CHECK(w.samples >= 1000);
    CHECK(w.continuity_violations == 0);
    CHECK(w.coercivity_violations == 0);
    CHECK(w.max_continuity_ratio <= 1.0);
  }
}

TEST_CASE("energy estimates") {
  SUBCASE("no reaction: biomass energy decays") {
    ScenarioConfig config = base_config();
    config.kinetics = GrowthRateModel::zero();
    const auto result = simulate(config);
    const auto& e = result.report.energy;
    CHECK(e.biomass.pass);
    CHECK(e.biomass.lhs <= e.biomass.rhs);
    const auto vol = cell_volumes(result.mesh);
    const VectorXd& b0 = result.trajectory.initial().B;
    CHECK(e.biomass.rhs == doctest::Approx(0.5 * b0.dot(vol.asDiagonal() * b0)).epsilon(1e-12));
  }
  SUBCASE("fuzz suite") {
    int failures = 0;
    for (const auto& config : testing::fuzz_suite(10, 99)) {
      const auto result = simulate(config);
      if (!result.report.energy.substrate.pass || !result.report.energy.biomass.pass) ++failures;
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("uniqueness gap") {
  ScenarioConfig config = base_config();
  const Mesh mesh = build_mesh(config.mesh);
  const auto guess = constant_guess(mesh, config, 0.4);
  const auto same = uniqueness_gap(mesh, config, guess, guess);
  CHECK(same.absolute == 0.0);

  const auto gap = uniqueness_gap(mesh, config);
  CHECK(gap.relative <= 10.0 * config.solver.picard_tol);

  config.kinetics = GrowthRateModel::zero();
  const auto linear = uniqueness_gap(mesh, config);
  CHECK(linear.iterations_a == 1);
  CHECK(linear.iterations_b == 1);
  CHECK(linear.relative <= config.solver.linear_tol);
}

TEST_CASE("report outputs") {
  const ScenarioConfig config = base_config();
  const auto result = simulate(config);
  CHECK(result.report.levels.size() == result.trajectory.states.size());
  CHECK(result.report.coercivity_margin > 0.0);
  std::ostringstream csv;
  write_diagnostics_csv(csv, result.report);
  const std::string text = csv.str();
  CHECK(text.substr(0, text.find('\n')).find("min_S") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(result.report.levels.size()) + 1);
  std::ostringstream summary;
  write_summary(summary, result.report, config);
  CHECK(summary.str().find("nonnegativity: pass") != std::string::npos);
  CHECK(summary.str().find("FAIL") == std::string::npos);
}

TEST_CASE("T = 0 keeps only the initial state") {
  ScenarioConfig config = base_config();
  config.final_time = 0.0;
  const auto result = simulate(config);
  CHECK(result.trajectory.states.size() == 1);
  CHECK(result.report.levels.size() == 1);
}
