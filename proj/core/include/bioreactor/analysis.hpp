#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bioreactor/timestepping.hpp"

namespace bioreactor {

struct NonnegativityCheck {
  double min_S = 0.0;
  double min_B = 0.0;
  /// max(|S_init|_inf, |B_init|_inf, sup S_e, 1)
  double scale = 1.0;
  double tolerance = 0.0;
  bool pass = true;
};

/// Minimum of S and B over all cells and time levels; passes when both are
/// at least -1e-12 * scale.
NonnegativityCheck check_nonnegativity(const Trajectory& traj, double inlet_sup);
NonnegativityCheck check_nonnegativity(const Trajectory& traj, const ScenarioConfig& config);

/**
 * Per-level margins of the maximum bounds
 *   max B(t_n) <= |B_init|_inf exp(mu_sup t_n),
 *   max S(t_n) <= max(|S_init|_inf, sup S_e),
 * each with relative slack 1e-8. The biomass bound of the implicit scheme,
 * |B_init|_inf (1 - dt mu_sup)^-n, is reported alongside.
 *
 * The substrate bound is asserted only when the data are nonnegative and the
 * flow speed does not vary along the axis; the biomass bound only when
 * B_init >= 0.
 */
struct BoundsCheck {
  std::vector<double> margin_B;
  std::vector<double> margin_B_implicit;
  std::vector<double> margin_S;
  double min_margin_B = 0.0;
  double min_margin_B_implicit = 0.0;
  double min_margin_S = 0.0;
  bool biomass_applicable = true;
  bool substrate_applicable = true;
  bool pass = true;
};

BoundsCheck check_linf_bounds(const Trajectory& traj, const GrowthRateModel& model, const ScenarioConfig& config);

/// Moles ledger of S + B per time level [mol].
struct MassLedger {
  std::vector<double> total;
  std::vector<double> influx;   // cumulative inlet influx
  std::vector<double> outflow;  // cumulative outlet outflow
  std::vector<double> residual;
  double max_relative_residual = 0.0;
  bool pass = true;
};

MassLedger mass_balance(const Trajectory& traj, const Mesh& mesh, const ScenarioConfig& config);

/// min(D_S, D_B) / C_T^2 - sup max(-Q, 0).
double coercivity_margin(const ScenarioConfig& config, double trace_constant);

/**
 * Square root of the largest generalized eigenvalue of the boundary mass form
 * against the discrete H1 form (cell mass plus stiffness), by power iteration
 * to relative change 1e-8.
 */
double estimate_trace_constant(const Mesh& mesh);

struct SpeciesConstants {
  double diffusion = 0.0;
  double k = 0.0;        // continuity constant
  double epsilon = 0.0;  // Young parameter of the advective term
  double alpha1 = 0.0;   // gradient coefficient D - sup_Q / (4 epsilon)
  double alpha2 = 0.0;   // L2 coefficient, equals delta
  double alpha = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
};

struct BilinearConstants {
  double sup_Q = 0.0;
  double trace_constant = 0.0;
  SpeciesConstants substrate;
  SpeciesConstants biomass;
};

BilinearConstants bilinear_constants_report(const ScenarioConfig& config, double trace_constant);

struct BilinearWitness {
  int samples = 0;
  int continuity_violations = 0;
  int coercivity_violations = 0;
  /// Largest |a(p, v)| / (k |p|_H1 |v|_H1) observed.
  double max_continuity_ratio = 0.0;
  /// Smallest (a(p, p) + lambda |p|^2) / (alpha |p|_H1^2) observed.
  double min_coercivity_ratio = 0.0;
};

/**
 * Tests continuity and coercivity of the volume-weighted transport forms of
 * both species on random field pairs at t = 0, T / 2 and T.
 */
BilinearWitness bilinear_witness(const Mesh& mesh, const ScenarioConfig& config, const BilinearConstants& constants,
                                 int pairs, std::uint64_t seed);

struct EnergyInequality {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
};

/**
 * Discrete energy estimates for the weighted fields exp(-lambda t) S and
 * exp(-lambda t) B, using the cell volumes, the stiffness form and the
 * reaction fields stored in the trajectory. The time integral of the lambda
 * term is kappa * sum_{n < N} |u_n|^2 with kappa = (1 - exp(-2 lambda dt)) / 2,
 * the exact weight produced by the implicit step; every other integral is
 * dt * sum_{n >= 1}.
 */
struct EnergyReport {
  double lambda = 0.0;
  double kappa = 0.0;
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  double epsilon3 = 0.0;
  double sup_Q = 0.0;
  double sup_c = 0.0;
  double inlet_measure = 0.0;
  double trace_constant = 0.0;
  EnergyInequality substrate;
  EnergyInequality biomass;
  /// The final H1 bounds need kappa / dt above the L2 coefficients, which
  /// fails when they exceed 1 / (2 dt).
  bool final_applicable = true;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  EnergyInequality final_biomass;
  EnergyInequality final_substrate;
  bool pass = true;
};

EnergyReport energy_estimate_report(const Trajectory& traj, const Mesh& mesh, const ScenarioConfig& config,
                                    const BilinearConstants& constants);

struct UniquenessGap {
  double absolute = 0.0;
  /// absolute divided by the space-time norm of the first trajectory
  double relative = 0.0;
  int iterations_a = 0;
  int iterations_b = 0;
};

/// Distance in L2(0, T; L2) of (S, B) between two trajectories.
double trajectory_distance(const Mesh& mesh, const Trajectory& a, const Trajectory& b);

/// Runs the space-time iteration from both guesses and measures the distance.
UniquenessGap uniqueness_gap(const Mesh& mesh, const ScenarioConfig& config, const Trajectory& guess_a,
                             const Trajectory& guess_b);

/// Guesses Z = 0 and Z = sup S_e.
UniquenessGap uniqueness_gap(const Mesh& mesh, const ScenarioConfig& config);

struct LevelDiagnostics {
  double t = 0.0;
  double min_S = 0.0;
  double max_S = 0.0;
  double min_B = 0.0;
  double max_B = 0.0;
  double moles_S = 0.0;
  double moles_B = 0.0;
  double influx = 0.0;
  double outflow = 0.0;
  double residual = 0.0;
  double margin_B = 0.0;
  double margin_S = 0.0;
  int picard_iterations = 0;
  int linear_iterations = 0;
};

struct DiagnosticsReport {
  /// One row per time level, t = 0 included.
  std::vector<LevelDiagnostics> levels;
  NonnegativityCheck nonnegativity;
  BoundsCheck bounds;
  MassLedger mass;
  double trace_constant = 0.0;
  double coercivity_margin = 0.0;
  BilinearConstants constants;
  EnergyReport energy;
  bool checks_enabled = true;

  /// Names of the failed checks; empty when everything passes.
  std::vector<std::string> failures() const;
  bool pass() const { return failures().empty(); }
};

DiagnosticsReport diagnose(const Mesh& mesh, const Trajectory& traj, const ScenarioConfig& config);

void write_diagnostics_csv(std::ostream& os, const DiagnosticsReport& report);
void write_summary(std::ostream& os, const DiagnosticsReport& report, const ScenarioConfig& config);

struct SimulationResult {
  Mesh mesh;
  Trajectory trajectory;
  DiagnosticsReport report;
};

/// Validates the config, builds the mesh, integrates over [0, T] and diagnoses.
SimulationResult simulate(const ScenarioConfig& config);

}  // namespace bioreactor
