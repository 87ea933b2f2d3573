#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "bioreactor/discretization.hpp"
#include "bioreactor/geometry.hpp"
#include "bioreactor/kinetics.hpp"

namespace bioreactor {

enum class NonlinearMode { PerStepPicard, SchauderGlobal };

std::string_view to_string(NonlinearMode mode);

struct SolverOptions {
  double dt = 0.01;  // s
  double linear_tol = 1e-10;
  int linear_max_iter = 2000;
  /// Relative L2 update norm that stops the fixed-point iteration.
  double picard_tol = 1e-12;
  int picard_max_iter = 200;
  /// 1 is the plain fixed-point map; smaller values under-relax it.
  double picard_damping = 1.0;
  NonlinearMode nonlinear_mode = NonlinearMode::PerStepPicard;

  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

/// Initial concentration: uniform value or one value per cell.
struct InitialField {
  std::variant<double, std::vector<double>> value = 0.0;

  VectorXd on(const Mesh& mesh) const;
  double sup_abs() const;
  double min() const;

  friend bool operator==(const InitialField&, const InitialField&) = default;
};

struct OutputOptions {
  int snapshots = 10;  // evenly spaced, plus t = 0 and t = T
  bool verbose = false;

  friend bool operator==(const OutputOptions&, const OutputOptions&) = default;
};

struct ScenarioConfig {
  MeshSpec mesh;
  TransportModel transport;
  GrowthRateModel kinetics = GrowthRateModel::monod(1.0, 0.5);
  InitialField initial_substrate{0.0};
  InitialField initial_biomass{0.1};
  double final_time = 1.0;  // s
  SolverOptions solver;
  /// Require the sign hypotheses (nonnegative data) and run invariant checks.
  bool invariant_checks = true;
  OutputOptions output;

  int num_steps() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ConfigError naming the offending field and the violated constraint.
void validate(const ScenarioConfig& config);

}  // namespace bioreactor
