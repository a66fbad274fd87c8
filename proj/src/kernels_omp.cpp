#include "difsi/detail/kernel_rows.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace difsi::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

SparseMatrix SparseRows::to_matrix(int n_cols) const {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(rows) * 9);
  for (int r = 0; r < rows; ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * kRowCapacity;
    for (int k = 0; k < count[static_cast<std::size_t>(r)]; ++k) {
      triplets.emplace_back(r, cols[base + static_cast<std::size_t>(k)], vals[base + static_cast<std::size_t>(k)]);
    }
  }
  SparseMatrix m(rows, n_cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace difsi::kernels

namespace difsi::kernels::omp {

void convect(const FieldContext& ctx, std::span<const double> u, std::span<double> out) {
  const auto c = detail::stencil(ctx);
  const int n = ctx.layout.n_u();
#pragma omp parallel for schedule(static)
  for (int row = 0; row < n; ++row) {
    out[static_cast<std::size_t>(row)] = detail::convect_row(c, u.data(), row);
  }
}

void convect_jacobian(const FieldContext& ctx, std::span<const double> u, SparseRows& rows) {
  const auto c = detail::stencil(ctx);
  const int n = ctx.layout.n_u();
  rows.resize(n);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < n; ++row) {
    detail::convect_jacobian_row(c, u.data(), row, rows);
  }
}

void interpolation_rows(const FieldContext& ctx, NodeSet nodes, SparseRows& rows) {
  const int n = 2 * static_cast<int>(nodes.positions.size());
  rows.resize(n);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < n; ++row) {
    detail::interpolation_row(ctx, nodes, row, rows);
  }
}

void corner_vorticity(const FieldContext& ctx, std::span<const double> u, std::span<double> out) {
  const auto c = detail::stencil(ctx);
  const int nx = ctx.grid.nx;
  const int ny = ctx.grid.ny;
#pragma omp parallel for schedule(static)
  for (int b = 0; b <= ny; ++b) {
    for (int a = 0; a <= nx; ++a) {
      out[static_cast<std::size_t>(b * (nx + 1) + a)] = detail::corner_vorticity_at(c, u.data(), a, b);
    }
  }
}

}  // namespace difsi::kernels::omp
