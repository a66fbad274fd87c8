#pragma once

#include <vector>

#include "difsi/delta.hpp"
#include "difsi/fluid_config.hpp"
#include "difsi/grid.hpp"

namespace difsi {

/// Lagrangian boundary nodes. Boundary vectors of length n_b = 2 * size()
/// are laid out [x components; y components].
struct BoundaryMesh {
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  /// Arc-length spacing between adjacent nodes.
  double spacing = 0.0;

  int size() const { return static_cast<int>(positions.size()); }
  int n_b() const { return 2 * size(); }
  bool empty() const { return positions.empty(); }

  Vector velocity_vector() const;
  Vector position_vector() const;

  /// Throws NodeOutsideDomain when a node is closer than 2 max(hx, hy) to the
  /// domain edge, or Error for inconsistent sizes / nonpositive spacing.
  void validate(const GridSpec& grid) const;
};

/// E (n_b x n_u): tensor-product delta weights from each node to the
/// staggered samples of its own velocity component.
SparseMatrix interpolation_matrix(const BoundaryMesh& mesh, const FluidOperators& ops);

/// Directional derivative of E u with respect to node positions:
/// column m is sum_i d(E u)/dx_i * dpos(i, m). dpos is n_b x k.
Matrix interpolation_position_derivative(const BoundaryMesh& mesh, const FluidOperators& ops,
                                         const Vector& u, const Matrix& dpos);

/// Directional derivative of E^T f with respect to node positions (n_u x k).
Matrix spread_position_derivative(const BoundaryMesh& mesh, const FluidOperators& ops,
                                  const Vector& f, const Matrix& dpos);

/// Nondimensional per-node traction -(hx hy / s) f (unit density).
Vector boundary_traction(const Vector& dual, const GridSpec& grid, const BoundaryMesh& mesh);

/// Physical per-node traction: -rho (hx hy / s) f, scaled by u_ref^2.
Vector boundary_forces(const Vector& dual, const FluidConfig& cfg, const GridSpec& grid,
                       const BoundaryMesh& mesh);

/// Midpoint quadrature sum_i f_i * spacing over the boundary.
Vec2 net_force(const Vector& traction, double spacing);
inline Vec2 net_force(const Vector& traction, const BoundaryMesh& mesh) {
  return net_force(traction, mesh.spacing);
}

}  // namespace difsi
