#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace bioreactor {

/// Point or direction in the meridian half-plane: radial then axial component.
struct Vec2 {
  double r = 0.0;
  double z = 0.0;
};

enum class MeshMode { Axial1D, Axisymmetric2D };
enum class BoundaryTag { Inlet, Outlet, Wall };

std::string_view to_string(MeshMode mode);
std::string_view to_string(BoundaryTag tag);

struct MeshSpec {
  MeshMode mode = MeshMode::Axial1D;
  double length = 1.0;  // m
  double radius = 0.1;  // m
  int n_axial = 32;
  int n_radial = 1;  // ignored in Axial1D

  friend bool operator==(const MeshSpec&, const MeshSpec&) = default;
};

struct Cell {
  Vec2 center;
  double volume = 0.0;  // m^3
};

/// Face shared by two cells; the normal points from owner to neighbor.
struct InteriorFace {
  std::size_t owner = 0;
  std::size_t neighbor = 0;
  double area = 0.0;  // m^2
  Vec2 normal;
  Vec2 center;
  double distance = 0.0;  // owner-to-neighbor center distance
};

/// Boundary face with outward normal.
struct BoundaryFace {
  std::size_t owner = 0;
  double area = 0.0;
  Vec2 normal;
  Vec2 center;
  BoundaryTag tag = BoundaryTag::Wall;
  double distance = 0.0;  // owner center to face center
};

/**
 * Structured cell-centered mesh of a cylinder of radius R and length L.
 *
 * The inlet is the top disk (z = L), the outlet the bottom disk (z = 0) and
 * the wall the lateral surface. In Axial1D mode every cell is a full-radius
 * slab; in Axisymmetric2D mode cells are annular rings on a uniform (r, z)
 * grid. Cell (i_axial, j_radial) has index i_axial * n_radial + j_radial.
 */
class Mesh {
 public:
  explicit Mesh(const MeshSpec& spec);

  const MeshSpec& spec() const noexcept { return spec_; }
  std::size_t num_cells() const noexcept { return cells_.size(); }
  int num_radial() const noexcept { return n_radial_; }
  int num_axial() const noexcept { return spec_.n_axial; }

  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const std::vector<InteriorFace>& interior_faces() const noexcept { return interior_; }
  const std::vector<BoundaryFace>& boundary_faces() const noexcept { return boundary_; }

  std::size_t cell_index(int i_axial, int j_radial) const noexcept {
    return static_cast<std::size_t>(i_axial) * static_cast<std::size_t>(n_radial_) +
           static_cast<std::size_t>(j_radial);
  }

  double total_volume() const noexcept;
  double axial_spacing() const noexcept { return spec_.length / spec_.n_axial; }
  double radial_spacing() const noexcept { return spec_.radius / n_radial_; }

 private:
  MeshSpec spec_;
  int n_radial_ = 1;
  std::vector<Cell> cells_;
  std::vector<InteriorFace> interior_;
  std::vector<BoundaryFace> boundary_;
};

/// Validates the spec and builds the mesh. Throws ConfigError naming the field.
Mesh build_mesh(const MeshSpec& spec);

void validate(const MeshSpec& spec);

/// Sum of the areas of all boundary faces with the given tag.
double boundary_measure(const Mesh& mesh, BoundaryTag tag);

/// Surface integral of the outward normal over a full revolution of the face
/// (Cartesian x, y, z components). Lateral ring faces integrate to zero.
std::array<double, 3> vector_area(const Vec2& normal, double area);

/// Net outflow of a uniform Cartesian field through the faces of one cell.
double net_uniform_flux(const Mesh& mesh, std::size_t cell, const std::array<double, 3>& field);

}  // namespace bioreactor
