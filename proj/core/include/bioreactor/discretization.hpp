#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <string_view>

#include "bioreactor/flow.hpp"
#include "bioreactor/geometry.hpp"

namespace bioreactor {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Eigen::VectorXd;

enum class AdvectionScheme { Upwind, Central };
enum class Species { Substrate, Biomass };

std::string_view to_string(AdvectionScheme scheme);

/**
 * Semi-discrete transport operator: du/dt = matrix * u + source.
 *
 * Rows are divided by the cell volume, so the matrix is in 1/s and the
 * source in mol/(m^3 s).
 */
struct TransportOperator {
  SparseMatrix matrix;
  VectorXd source;
  double time = 0.0;
  AdvectionScheme scheme = AdvectionScheme::Upwind;
};

/// Stacked operator on (S, B): [[L_S, -diag(c)], [0, L_B + diag(c)]].
struct CoupledOperator {
  SparseMatrix matrix;
  VectorXd source;
};

/// Coefficients shared by the substrate and biomass transport operators.
struct TransportModel {
  double diffusion_substrate = 1e-2;  // m^2/s
  double diffusion_biomass = 1e-2;    // m^2/s
  FlowField flow = FlowField::constant(0.1);
  InletSchedule inlet = InletSchedule::constant(1.0);
  AdvectionScheme scheme = AdvectionScheme::Upwind;
  /// Reject negative sampled flow speeds.
  bool strict = true;

  friend bool operator==(const TransportModel&, const TransportModel&) = default;
};

/// Extra volumetric sources and boundary fluxes used to manufacture solutions.
/// `boundary_flux` is added to the outward normal total flux of the face, so a
/// positive value feeds the owner cell.
struct ManufacturedForcing {
  std::function<double(Species, const Vec2&, double)> volumetric;
  std::function<double(Species, BoundaryTag, const Vec2&, double)> boundary_flux;
};

/**
 * Two-point flux finite volume operator for div(D grad u - Q u).
 *
 * Inlet faces carry the prescribed total influx Q * inlet_concentration * area,
 * wall faces nothing, and outlet faces the advective outflow of the owner cell
 * (zero diffusive flux).
 */
TransportOperator assemble_transport(const Mesh& mesh, double diffusion, const FlowField& flow, double t,
                                     AdvectionScheme scheme, double inlet_concentration, bool strict = true);

TransportOperator assemble_species(const Mesh& mesh, const TransportModel& model, Species species, double t);

void add_manufactured_forcing(TransportOperator& op, const Mesh& mesh, const ManufacturedForcing& forcing,
                              Species species);

CoupledOperator couple(const TransportOperator& substrate, const TransportOperator& biomass, const VectorXd& c);

CoupledOperator assemble_coupled(const Mesh& mesh, const TransportModel& model, const VectorXd& c, double t,
                                 const ManufacturedForcing* forcing = nullptr);

/// Cell volumes as a vector.
VectorXd cell_volumes(const Mesh& mesh);

/// u' K u = sum over interior faces of area / distance * (u_a - u_b)^2.
SparseMatrix stiffness_form(const Mesh& mesh);

/// u' M_b u = sum over boundary faces of area * u_owner^2.
SparseMatrix boundary_mass_form(const Mesh& mesh);

/// Volume weighted form a_h(p, v) = -v' diag(V) L p of a transport operator.
SparseMatrix bilinear_form(const Mesh& mesh, const TransportOperator& op);

/// Prescribed influx through the inlet [mol/s] at time t.
double inlet_influx(const Mesh& mesh, const FlowField& flow, double inlet_concentration, double t);

/// Advective outflow through the outlet [mol/s] for field u at time t.
double outlet_outflow(const Mesh& mesh, const FlowField& flow, const VectorXd& u, double t);

/// Triplet dump "row col value" with full precision, one entry per line.
void write_triplets(std::ostream& os, const SparseMatrix& matrix);

}  // namespace bioreactor
