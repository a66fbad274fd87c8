#include "difsi/convection.hpp"

#include "difsi/detail/stencil.hpp"
#include "difsi/kernels.hpp"

namespace difsi {

namespace {
kernels::FieldContext context(const FluidOperators& ops) {
  return {ops.grid, ops.layout, ops.boundary};
}
}  // namespace

Vector convect(const Vector& u, const FluidOperators& ops) {
  require_size(u.size(), ops.n_u(), "convect");
  Vector out(ops.n_u());
  kernels::omp::convect(context(ops), {u.data(), static_cast<std::size_t>(u.size())},
                        {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

SparseMatrix convect_jacobian(const Vector& u, const FluidOperators& ops) {
  require_size(u.size(), ops.n_u(), "convect_jacobian");
  kernels::SparseRows rows;
  kernels::omp::convect_jacobian(context(ops), {u.data(), static_cast<std::size_t>(u.size())},
                                 rows);
  return rows.to_matrix(ops.n_u());
}

Vector corner_vorticity(const Vector& u, const FluidOperators& ops) {
  require_size(u.size(), ops.n_u(), "corner_vorticity");
  Vector out((ops.grid.nx + 1) * (ops.grid.ny + 1));
  kernels::omp::corner_vorticity(context(ops), {u.data(), static_cast<std::size_t>(u.size())},
                                 {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Vector vorticity_field(const Vector& u, const FluidOperators& ops) {
  const Vector all = corner_vorticity(u, ops);
  const int nx = ops.grid.nx;
  const int ny = ops.grid.ny;
  Vector out((nx - 1) * (ny - 1));
  for (int b = 1; b < ny; ++b) {
    for (int a = 1; a < nx; ++a) {
      out[(b - 1) * (nx - 1) + (a - 1)] = all[b * (nx + 1) + a];
    }
  }
  return out;
}

CellFields cell_centered_fields(const Vector& u, const Vector& p, const FluidOperators& ops) {
  require_size(p.size(), ops.n_f(), "cell_centered_fields");
  const int nx = ops.grid.nx;
  const int ny = ops.grid.ny;
  const detail::StencilContext c{ops.grid, ops.layout, ops.boundary};
  const Vector w = corner_vorticity(u, ops);
  CellFields f{nx, ny, Vector(nx * ny), Vector(nx * ny), p, Vector(nx * ny)};
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = j * nx + i;
      f.ux[k] = 0.5 * (detail::value(detail::ux_at(c, i, j), u.data()) +
                       detail::value(detail::ux_at(c, i + 1, j), u.data()));
      f.uy[k] = 0.5 * (detail::value(detail::uy_at(c, i, j), u.data()) +
                       detail::value(detail::uy_at(c, i, j + 1), u.data()));
      f.vorticity[k] = 0.25 * (w[j * (nx + 1) + i] + w[j * (nx + 1) + i + 1] +
                               w[(j + 1) * (nx + 1) + i] + w[(j + 1) * (nx + 1) + i + 1]);
    }
  }
  return f;
}

}  // namespace difsi
