#include <benchmark/benchmark.h>

#include "bioreactor/analysis.hpp"

namespace {

using namespace bioreactor;

ScenarioConfig monod_config(int n_axial, int n_radial) {
  ScenarioConfig config;
  config.mesh = MeshSpec{n_radial > 1 ? MeshMode::Axisymmetric2D : MeshMode::Axial1D, 0.5, 0.1, n_axial, n_radial};
  config.transport.flow = FlowField::constant(0.1);
  config.transport.inlet = InletSchedule::constant(1.0);
  config.kinetics = GrowthRateModel::monod(1.0, 0.5);
  config.initial_substrate.value = 0.0;
  config.initial_biomass.value = 0.1;
  config.final_time = 5.0;
  config.solver.dt = 0.05;
  return config;
}

void BM_AssembleCoupled(benchmark::State& state) {
  const auto config = monod_config(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Mesh mesh = build_mesh(config.mesh);
  const VectorXd c = VectorXd::Constant(static_cast<Eigen::Index>(mesh.num_cells()), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_coupled(mesh, config.transport, c, 0.5));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mesh.num_cells()));
}
BENCHMARK(BM_AssembleCoupled)->Args({32, 1})->Args({256, 1})->Args({64, 16});

void BM_NonlinearStep(benchmark::State& state) {
  const auto config = monod_config(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Mesh mesh = build_mesh(config.mesh);
  const State s0 = initial_state(mesh, config);
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_nonlinear(mesh, config, s0, config.solver.dt, config.solver));
  }
}
BENCHMARK(BM_NonlinearStep)->Args({32, 1})->Args({256, 1})->Args({64, 32})->Unit(benchmark::kMicrosecond);

// 32 cells, 100 steps, all diagnostics.
void BM_SimulateMonod(benchmark::State& state) {
  const auto config = monod_config(32, 1);
  for (auto _ : state) {
    const auto result = simulate(config);
    if (!result.report.pass()) state.SkipWithError("invariant checks failed");
    benchmark::DoNotOptimize(result.trajectory.final().S.data());
  }
}
BENCHMARK(BM_SimulateMonod)->Unit(benchmark::kMillisecond);

void BM_TraceConstant(benchmark::State& state) {
  const Mesh mesh = build_mesh(MeshSpec{MeshMode::Axial1D, 0.5, 0.1, static_cast<int>(state.range(0)), 1});
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_trace_constant(mesh));
  }
}
BENCHMARK(BM_TraceConstant)->Arg(32)->Arg(256)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
