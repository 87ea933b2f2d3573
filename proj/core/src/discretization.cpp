#include "bioreactor/discretization.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

#include "bioreactor/error.hpp"

namespace bioreactor {

namespace {

using Triplet = Eigen::Triplet<double>;

double sample_flow(const FlowField& flow, const Vec2& x, double t, bool strict) {
  const double q = flow(x, t);
  if (strict && q < 0.0) {
    throw ConfigError("flow", "flow speed must be nonnegative (sampled negative value)");
  }
  return q;
}

}  // namespace

std::string_view to_string(AdvectionScheme scheme) {
  return scheme == AdvectionScheme::Upwind ? "upwind" : "central";
}

TransportOperator assemble_transport(const Mesh& mesh, double diffusion, const FlowField& flow, double t,
                                     AdvectionScheme scheme, double inlet_concentration, bool strict) {
  if (!(diffusion > 0.0) || !std::isfinite(diffusion)) {
    throw ConfigError("diffusion", "must be positive and finite");
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  std::vector<Triplet> entries;
  entries.reserve(4 * mesh.interior_faces().size() + mesh.num_cells());
  VectorXd source = VectorXd::Zero(n);

  for (const auto& f : mesh.interior_faces()) {
    const auto a = static_cast<Eigen::Index>(f.owner);
    const auto b = static_cast<Eigen::Index>(f.neighbor);
    const double g = diffusion * f.area / f.distance;
    // Velocity component along the owner-to-neighbor normal; the flow is (0, 0, -Q).
    const double w = f.normal.z == 0.0 ? 0.0 : -sample_flow(flow, f.center, t, strict) * f.normal.z;
    double wa = 0.0;  // weight of u_a in the face value
    double wb = 0.0;
    if (scheme == AdvectionScheme::Upwind) {
      (w >= 0.0 ? wa : wb) = 1.0;
    } else {
      wa = wb = 0.5;
    }
    const double adv = w * f.area;
    // Owner gains g (u_b - u_a) - adv (wa u_a + wb u_b); neighbor the opposite.
    entries.emplace_back(a, a, -g - adv * wa);
    entries.emplace_back(a, b, g - adv * wb);
    entries.emplace_back(b, b, -g + adv * wb);
    entries.emplace_back(b, a, g + adv * wa);
  }

  for (const auto& f : mesh.boundary_faces()) {
    const auto a = static_cast<Eigen::Index>(f.owner);
    switch (f.tag) {
      case BoundaryTag::Inlet:
        source[a] += sample_flow(flow, f.center, t, strict) * inlet_concentration * f.area;
        break;
      case BoundaryTag::Outlet: {
        const double w = -sample_flow(flow, f.center, t, strict) * f.normal.z;
        entries.emplace_back(a, a, -w * f.area);
        break;
      }
      case BoundaryTag::Wall:
        break;
    }
  }

  TransportOperator op;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  op.matrix.makeCompressed();
  const VectorXd inv_volume = cell_volumes(mesh).cwiseInverse();
  op.matrix = inv_volume.asDiagonal() * op.matrix;
  op.source = source.cwiseProduct(inv_volume);
  op.time = t;
  op.scheme = scheme;
  return op;
}

TransportOperator assemble_species(const Mesh& mesh, const TransportModel& model, Species species, double t) {
  if (species == Species::Substrate) {
    return assemble_transport(mesh, model.diffusion_substrate, model.flow, t, model.scheme, model.inlet(t),
                              model.strict);
  }
  return assemble_transport(mesh, model.diffusion_biomass, model.flow, t, model.scheme, 0.0, model.strict);
}

void add_manufactured_forcing(TransportOperator& op, const Mesh& mesh, const ManufacturedForcing& forcing,
                              Species species) {
  const auto& cells = mesh.cells();
  if (forcing.volumetric) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      op.source[static_cast<Eigen::Index>(i)] += forcing.volumetric(species, cells[i].center, op.time);
    }
  }
  if (forcing.boundary_flux) {
    for (const auto& f : mesh.boundary_faces()) {
      const auto a = static_cast<Eigen::Index>(f.owner);
      op.source[a] += forcing.boundary_flux(species, f.tag, f.center, op.time) * f.area / cells[f.owner].volume;
    }
  }
}

CoupledOperator couple(const TransportOperator& substrate, const TransportOperator& biomass, const VectorXd& c) {
  const Eigen::Index n = substrate.matrix.rows();
  if (biomass.matrix.rows() != n || c.size() != n) {
    throw Error("coupled operator: reaction field has " + std::to_string(c.size()) + " entries, mesh has " +
                std::to_string(n) + " cells");
  }
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(substrate.matrix.nonZeros() + biomass.matrix.nonZeros() + 2 * n));
  for (Eigen::Index r = 0; r < n; ++r) {
    for (SparseMatrix::InnerIterator it(substrate.matrix, r); it; ++it) {
      entries.emplace_back(r, it.col(), it.value());
    }
    for (SparseMatrix::InnerIterator it(biomass.matrix, r); it; ++it) {
      entries.emplace_back(n + r, n + it.col(), it.value());
    }
    entries.emplace_back(r, n + r, -c[r]);
    entries.emplace_back(n + r, n + r, c[r]);
  }
  CoupledOperator op;
  op.matrix.resize(2 * n, 2 * n);
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  op.matrix.makeCompressed();
  op.source.resize(2 * n);
  op.source << substrate.source, biomass.source;
  return op;
}

CoupledOperator assemble_coupled(const Mesh& mesh, const TransportModel& model, const VectorXd& c, double t,
                                 const ManufacturedForcing* forcing) {
  auto s = assemble_species(mesh, model, Species::Substrate, t);
  auto b = assemble_species(mesh, model, Species::Biomass, t);
  if (forcing != nullptr) {
    add_manufactured_forcing(s, mesh, *forcing, Species::Substrate);
    add_manufactured_forcing(b, mesh, *forcing, Species::Biomass);
  }
  return couple(s, b, c);
}

VectorXd cell_volumes(const Mesh& mesh) {
  VectorXd v(static_cast<Eigen::Index>(mesh.num_cells()));
  for (std::size_t i = 0; i < mesh.num_cells(); ++i) {
    v[static_cast<Eigen::Index>(i)] = mesh.cells()[i].volume;
  }
  return v;
}

SparseMatrix stiffness_form(const Mesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  std::vector<Triplet> entries;
  entries.reserve(4 * mesh.interior_faces().size());
  for (const auto& f : mesh.interior_faces()) {
    const double g = f.area / f.distance;
    const auto a = static_cast<Eigen::Index>(f.owner);
    const auto b = static_cast<Eigen::Index>(f.neighbor);
    entries.emplace_back(a, a, g);
    entries.emplace_back(b, b, g);
    entries.emplace_back(a, b, -g);
    entries.emplace_back(b, a, -g);
  }
  SparseMatrix k(n, n);
  k.setFromTriplets(entries.begin(), entries.end());
  return k;
}

SparseMatrix boundary_mass_form(const Mesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  std::vector<Triplet> entries;
  for (const auto& f : mesh.boundary_faces()) {
    entries.emplace_back(static_cast<Eigen::Index>(f.owner), static_cast<Eigen::Index>(f.owner), f.area);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

SparseMatrix bilinear_form(const Mesh& mesh, const TransportOperator& op) {
  SparseMatrix a = cell_volumes(mesh).asDiagonal() * op.matrix;
  return -a;
}

double inlet_influx(const Mesh& mesh, const FlowField& flow, double inlet_concentration, double t) {
  double total = 0.0;
  for (const auto& f : mesh.boundary_faces()) {
    if (f.tag == BoundaryTag::Inlet) {
      total += flow(f.center, t) * inlet_concentration * f.area;
    }
  }
  return total;
}

double outlet_outflow(const Mesh& mesh, const FlowField& flow, const VectorXd& u, double t) {
  double total = 0.0;
  for (const auto& f : mesh.boundary_faces()) {
    if (f.tag == BoundaryTag::Outlet) {
      total += flow(f.center, t) * f.area * u[static_cast<Eigen::Index>(f.owner)];
    }
  }
  return total;
}

void write_triplets(std::ostream& os, const SparseMatrix& matrix) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(17);
  for (Eigen::Index r = 0; r < matrix.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  os.flags(flags);
  os.precision(precision);
}

}  // namespace bioreactor
