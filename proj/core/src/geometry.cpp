#include "bioreactor/geometry.hpp"

#include <cmath>
#include <numbers>

#include "bioreactor/error.hpp"

namespace bioreactor {

std::string_view to_string(MeshMode mode) {
  return mode == MeshMode::Axial1D ? "axial1d" : "axisymmetric2d";
}

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Inlet: return "inlet";
    case BoundaryTag::Outlet: return "outlet";
    case BoundaryTag::Wall: return "wall";
  }
  return "unknown";
}

void validate(const MeshSpec& spec) {
  if (!(spec.length > 0.0) || !std::isfinite(spec.length)) {
    throw ConfigError("mesh.length", "must be positive and finite");
  }
  if (!(spec.radius > 0.0) || !std::isfinite(spec.radius)) {
    throw ConfigError("mesh.radius", "must be positive and finite");
  }
  if (spec.n_axial < 1) {
    throw ConfigError("mesh.n_axial", "must be at least 1");
  }
  if (spec.mode == MeshMode::Axisymmetric2D && spec.n_radial < 1) {
    throw ConfigError("mesh.n_radial", "must be at least 1");
  }
}

Mesh::Mesh(const MeshSpec& spec) : spec_(spec) {
  validate(spec_);
  using std::numbers::pi;
  n_radial_ = spec_.mode == MeshMode::Axial1D ? 1 : spec_.n_radial;

  const int nz = spec_.n_axial;
  const int nr = n_radial_;
  const double dz = spec_.length / nz;
  const double dr = spec_.radius / nr;
  const double R = spec_.radius;

  auto r_edge = [&](int j) { return j == nr ? R : j * dr; };
  auto ring_area = [&](int j) {
    const double r0 = r_edge(j);
    const double r1 = r_edge(j + 1);
    return pi * (r1 * r1 - r0 * r0);
  };
  auto r_center = [&](int j) {
    return spec_.mode == MeshMode::Axial1D ? 0.0 : 0.5 * (r_edge(j) + r_edge(j + 1));
  };

  cells_.resize(static_cast<std::size_t>(nz) * nr);
  for (int i = 0; i < nz; ++i) {
    for (int j = 0; j < nr; ++j) {
      cells_[cell_index(i, j)] = Cell{{r_center(j), (i + 0.5) * dz}, ring_area(j) * dz};
    }
  }

  for (int i = 0; i < nz; ++i) {
    for (int j = 0; j < nr; ++j) {
      const std::size_t c = cell_index(i, j);
      if (i + 1 < nz) {
        interior_.push_back({c, cell_index(i + 1, j), ring_area(j), {0.0, 1.0}, {r_center(j), (i + 1) * dz}, dz});
      }
      if (j + 1 < nr) {
        const double r = r_edge(j + 1);
        interior_.push_back(
            {c, cell_index(i, j + 1), 2.0 * pi * r * dz, {1.0, 0.0}, {r, (i + 0.5) * dz}, r_center(j + 1) - r_center(j)});
      }
    }
  }

  for (int j = 0; j < nr; ++j) {
    boundary_.push_back({cell_index(nz - 1, j), ring_area(j), {0.0, 1.0}, {r_center(j), spec_.length},
                         BoundaryTag::Inlet, 0.5 * dz});
    boundary_.push_back({cell_index(0, j), ring_area(j), {0.0, -1.0}, {r_center(j), 0.0}, BoundaryTag::Outlet, 0.5 * dz});
  }
  for (int i = 0; i < nz; ++i) {
    const double wall_distance = spec_.mode == MeshMode::Axial1D ? R : R - r_center(nr - 1);
    boundary_.push_back({cell_index(i, nr - 1), 2.0 * pi * R * dz, {1.0, 0.0}, {R, (i + 0.5) * dz},
                         BoundaryTag::Wall, wall_distance});
  }
}

double Mesh::total_volume() const noexcept {
  double v = 0.0;
  for (const auto& c : cells_) {
    v += c.volume;
  }
  return v;
}

Mesh build_mesh(const MeshSpec& spec) { return Mesh(spec); }

double boundary_measure(const Mesh& mesh, BoundaryTag tag) {
  double total = 0.0;
  for (const auto& f : mesh.boundary_faces()) {
    if (f.tag == tag) {
      total += f.area;
    }
  }
  return total;
}

std::array<double, 3> vector_area(const Vec2& normal, double area) {
  // A ring face with radial normal closes on itself: the integral of
  // (cos t, sin t) over a full turn vanishes.
  return {0.0, 0.0, normal.z * area};
}

double net_uniform_flux(const Mesh& mesh, std::size_t cell, const std::array<double, 3>& field) {
  auto dot = [&](const std::array<double, 3>& a) { return a[0] * field[0] + a[1] * field[1] + a[2] * field[2]; };
  double flux = 0.0;
  for (const auto& f : mesh.interior_faces()) {
    if (f.owner == cell) {
      flux += dot(vector_area(f.normal, f.area));
    } else if (f.neighbor == cell) {
      flux -= dot(vector_area(f.normal, f.area));
    }
  }
  for (const auto& f : mesh.boundary_faces()) {
    if (f.owner == cell) {
      flux += dot(vector_area(f.normal, f.area));
    }
  }
  return flux;
}

}  // namespace bioreactor
