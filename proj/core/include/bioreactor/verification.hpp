#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "bioreactor/timestepping.hpp"

namespace bioreactor {

/**
 * Manufactured solution S*(z, t) = p_S(z) exp(a t), B*(z, t) = p_B(z) exp(a t)
 * for constant flow speed Q and zero inlet concentration.
 *
 * The volumetric sources are the residuals of the continuous equations at the
 * manufactured fields; the boundary data are the total fluxes D u_z + Q u at
 * the inlet and -D u_z at the outlet, which the scheme cannot produce on its
 * own. Fields depend on z only, so the same case runs on both mesh modes.
 */
struct MMSCase {
  std::vector<double> substrate;  // polynomial coefficients in z, ascending
  std::vector<double> biomass;
  double rate = 0.0;  // a [1/s]
  double length = 1.0;
  double radius = 0.1;
  double diffusion_substrate = 1e-2;
  double diffusion_biomass = 1e-2;
  double flow = 0.0;
  GrowthRateModel kinetics;
  AdvectionScheme scheme = AdvectionScheme::Central;
  MeshMode mode = MeshMode::Axial1D;
  double final_time = 0.5;

  double exact(Species species, double z, double t) const;
  double exact_dz(Species species, double z, double t) const;
  double exact_dzz(Species species, double z, double t) const;
  double exact_dt(Species species, double z, double t) const;

  ManufacturedForcing forcing() const;
  /// Scenario on n_axial cells (2 radial rings in axisymmetric mode) with checks off.
  ScenarioConfig config(int n_axial, double dt) const;
  /// Exact cell-center values at time t.
  State exact_state(const Mesh& mesh, double t) const;
};

/// Diffusion only (Q = 0, no reaction), central fluxes.
MMSCase diffusion_mms_case();
/// Advection dominated transport with Monod kinetics, upwind fluxes.
MMSCase advection_mms_case();

struct StudyLevel {
  int n_axial = 0;
  double h = 0.0;
  double dt = 0.0;
  double error = 0.0;
  /// Order against the previous level; NaN on the first.
  double order = 0.0;
};

struct StudyResult {
  std::vector<StudyLevel> levels;
  /// Least-squares slope of log(error) against log(h) (or log(dt)).
  double observed_order = 0.0;
  bool monotone = true;
  /// False when the errors do not decrease monotonically.
  bool conclusive = true;
};

/// L2 distance between two states over the mesh, both species.
double state_error(const Mesh& mesh, const State& a, const State& b);

/**
 * Spatial study: one run per mesh level with dt = dt_rule(h), rounded down so
 * that the final time is a whole number of steps; error against the exact
 * fields at the final time.
 */
StudyResult run_mms_study(const MMSCase& mms, const std::vector<int>& levels,
                          const std::function<double(double)>& dt_rule);

/**
 * Temporal study on a fixed mesh: errors between consecutive halvings of dt
 * (the spatial error cancels), orders against dt.
 */
StudyResult run_temporal_study(const MMSCase& mms, int n_axial, const std::vector<double>& dts);

void write_study_csv(std::ostream& os, const StudyResult& study);

/**
 * Adaptive Dormand-Prince integration of the semi-discrete system on the time
 * grid of the config, used as ground truth for the implicit scheme. With
 * `fixed_reaction` the reaction field is frozen, otherwise c = mu(S).
 * Limited to 64 cells.
 */
Trajectory dense_reference(const Mesh& mesh, const ScenarioConfig& config, double rtol,
                           const VectorXd* fixed_reaction = nullptr);

/// S = S_e, B = 0 for constant flow, constant inlet data and no reaction.
State steady_state_constant(const Mesh& mesh, const ScenarioConfig& config);

/// Max norm of the substrate operator applied to the constant steady state.
double steady_state_residual(const Mesh& mesh, const ScenarioConfig& config);

}  // namespace bioreactor
