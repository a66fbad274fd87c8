#pragma once

#include "difsi/grid.hpp"

namespace difsi {

/// Discrete convection N(u) including the boundary closure terms of `ops`.
Vector convect(const Vector& u, const FluidOperators& ops);

/// dN/du at u. Linear in u apart from boundary closure terms.
SparseMatrix convect_jacobian(const Vector& u, const FluidOperators& ops);

/// Curl dv/dx - du/dy at all (nx+1) x (ny+1) cell corners, x-fastest.
/// Boundary corners use the ghost closure of `ops`.
Vector corner_vorticity(const Vector& u, const FluidOperators& ops);

/// Curl at the interior corners (1..nx-1) x (1..ny-1), x-fastest.
Vector vorticity_field(const Vector& u, const FluidOperators& ops);

/// Velocity, pressure and vorticity averaged onto cell centers.
struct CellFields {
  int nx = 0;
  int ny = 0;
  Vector ux;
  Vector uy;
  Vector p;
  Vector vorticity;
};

CellFields cell_centered_fields(const Vector& u, const Vector& p, const FluidOperators& ops);

}  // namespace difsi
