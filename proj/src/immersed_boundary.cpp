#include "difsi/immersed_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "difsi/kernels.hpp"

namespace difsi {

Vector BoundaryMesh::velocity_vector() const {
  const int n = size();
  Vector v(2 * n);
  for (int i = 0; i < n; ++i) {
    v[i] = velocities[static_cast<std::size_t>(i)].x;
    v[n + i] = velocities[static_cast<std::size_t>(i)].y;
  }
  return v;
}

Vector BoundaryMesh::position_vector() const {
  const int n = size();
  Vector v(2 * n);
  for (int i = 0; i < n; ++i) {
    v[i] = positions[static_cast<std::size_t>(i)].x;
    v[n + i] = positions[static_cast<std::size_t>(i)].y;
  }
  return v;
}

void BoundaryMesh::validate(const GridSpec& grid) const {
  if (velocities.size() != positions.size()) {
    throw DimensionMismatch("boundary mesh: positions and velocities differ in length");
  }
  if (empty()) return;
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw Error("boundary mesh: spacing must be positive");
  const double margin = 2.0 * std::max(grid.hx, grid.hy);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Vec2 p = positions[i];
    if (!(p.x >= grid.x_min() + margin && p.x <= grid.x_max() - margin &&
          p.y >= grid.y_min() + margin && p.y <= grid.y_max() - margin)) {
      throw NodeOutsideDomain("boundary node " + std::to_string(i) + " at (" + std::to_string(p.x) +
                              ", " + std::to_string(p.y) + ") is within two cells of the domain edge");
    }
  }
}

SparseMatrix interpolation_matrix(const BoundaryMesh& mesh, const FluidOperators& ops) {
  mesh.validate(ops.grid);
  kernels::SparseRows rows;
  kernels::omp::interpolation_rows({ops.grid, ops.layout, ops.boundary}, {mesh.positions}, rows);
  for (int r = 0; r < rows.rows; ++r) {
    if (rows.count[static_cast<std::size_t>(r)] < 0) {
      throw NodeOutsideDomain("kernel support of boundary node " + std::to_string(r % mesh.size()) +
                              " leaves the unknown velocity samples");
    }
  }
  return rows.to_matrix(ops.n_u());
}

namespace {

// Visits every (sample column, dw/dX, dw/dY) in the support of node i for
// component `comp` (0 = x, 1 = y).
template <typename Visit>
void visit_support_gradient(const FluidOperators& ops, Vec2 p, int comp, Visit&& visit) {
  const GridSpec& g = ops.grid;
  const double sx = comp == 0 ? 0.0 : 0.5;
  const double sy = comp == 0 ? 0.5 : 0.0;
  const double fx = (p.x - g.origin.x) / g.hx - sx;
  const double fy = (p.y - g.origin.y) / g.hy - sy;
  const int a0 = static_cast<int>(std::floor(fx)) - 1;
  const int b0 = static_cast<int>(std::floor(fy)) - 1;
  for (int b = b0; b <= b0 + 3; ++b) {
    const double ry = b - fy;
    const double wy = DeltaKernel::weight(ry);
    const double dwy = DeltaKernel::derivative(ry);
    if (wy == 0.0 && dwy == 0.0) continue;
    for (int a = a0; a <= a0 + 3; ++a) {
      const double rx = a - fx;
      const double wx = DeltaKernel::weight(rx);
      const double dwx = DeltaKernel::derivative(rx);
      if (wx == 0.0 && dwx == 0.0) continue;
      const int col = comp == 0 ? ops.layout.ux_index(a, b) : ops.layout.uy_index(a, b);
      if (col < 0) continue;
      // r = (x_sample - X) / h, so dr/dX = -1/h.
      visit(col, -dwx * wy / g.hx, -wx * dwy / g.hy);
    }
  }
}

}  // namespace

Matrix interpolation_position_derivative(const BoundaryMesh& mesh, const FluidOperators& ops,
                                         const Vector& u, const Matrix& dpos) {
  const int n = mesh.size();
  require_size(u.size(), ops.n_u(), "interpolation_position_derivative (u)");
  require_size(dpos.rows(), 2 * n, "interpolation_position_derivative (dpos)");
  Matrix out = Matrix::Zero(2 * n, dpos.cols());
  for (int i = 0; i < n; ++i) {
    const Vec2 p = mesh.positions[static_cast<std::size_t>(i)];
    for (int comp = 0; comp < 2; ++comp) {
      double gx = 0.0;
      double gy = 0.0;
      visit_support_gradient(ops, p, comp, [&](int col, double dwdx, double dwdy) {
        gx += dwdx * u[col];
        gy += dwdy * u[col];
      });
      out.row(comp * n + i) = gx * dpos.row(i) + gy * dpos.row(n + i);
    }
  }
  return out;
}

Matrix spread_position_derivative(const BoundaryMesh& mesh, const FluidOperators& ops,
                                  const Vector& f, const Matrix& dpos) {
  const int n = mesh.size();
  require_size(f.size(), 2 * n, "spread_position_derivative (f)");
  require_size(dpos.rows(), 2 * n, "spread_position_derivative (dpos)");
  Matrix out = Matrix::Zero(ops.n_u(), dpos.cols());
  for (int i = 0; i < n; ++i) {
    const Vec2 p = mesh.positions[static_cast<std::size_t>(i)];
    for (int comp = 0; comp < 2; ++comp) {
      const double fi = f[comp * n + i];
      if (fi == 0.0) continue;
      visit_support_gradient(ops, p, comp, [&](int col, double dwdx, double dwdy) {
        out.row(col) += fi * (dwdx * dpos.row(i) + dwdy * dpos.row(n + i));
      });
    }
  }
  return out;
}

Vector boundary_traction(const Vector& dual, const GridSpec& grid, const BoundaryMesh& mesh) {
  require_size(dual.size(), mesh.n_b(), "boundary_traction");
  if (mesh.empty()) return Vector();
  return -(grid.hx * grid.hy / mesh.spacing) * dual;
}

Vector boundary_forces(const Vector& dual, const FluidConfig& cfg, const GridSpec& grid,
                       const BoundaryMesh& mesh) {
  const double u2 = cfg.reference_velocity * cfg.reference_velocity;
  return cfg.density * u2 * boundary_traction(dual, grid, mesh);
}

Vec2 net_force(const Vector& traction, double spacing) {
  if (traction.size() % 2 != 0) throw DimensionMismatch("net_force: odd boundary vector length");
  const Eigen::Index n = traction.size() / 2;
  return {traction.head(n).sum() * spacing, traction.tail(n).sum() * spacing};
}

}  // namespace difsi
