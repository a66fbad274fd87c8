#include "difsi/detail/kernel_rows.hpp"

namespace difsi::kernels::serial {

void convect(const FieldContext& ctx, std::span<const double> u, std::span<double> out) {
  const auto c = detail::stencil(ctx);
  const int n = ctx.layout.n_u();
  for (int row = 0; row < n; ++row) {
    out[static_cast<std::size_t>(row)] = detail::convect_row(c, u.data(), row);
  }
}

void convect_jacobian(const FieldContext& ctx, std::span<const double> u, SparseRows& rows) {
  const auto c = detail::stencil(ctx);
  const int n = ctx.layout.n_u();
  rows.resize(n);
  for (int row = 0; row < n; ++row) {
    detail::convect_jacobian_row(c, u.data(), row, rows);
  }
}

void interpolation_rows(const FieldContext& ctx, NodeSet nodes, SparseRows& rows) {
  const int n = 2 * static_cast<int>(nodes.positions.size());
  rows.resize(n);
  for (int row = 0; row < n; ++row) {
    detail::interpolation_row(ctx, nodes, row, rows);
  }
}

void corner_vorticity(const FieldContext& ctx, std::span<const double> u, std::span<double> out) {
  const auto c = detail::stencil(ctx);
  const int nx = ctx.grid.nx;
  const int ny = ctx.grid.ny;
  for (int b = 0; b <= ny; ++b) {
    for (int a = 0; a <= nx; ++a) {
      out[static_cast<std::size_t>(b * (nx + 1) + a)] = detail::corner_vorticity_at(c, u.data(), a, b);
    }
  }
}

}  // namespace difsi::kernels::serial
