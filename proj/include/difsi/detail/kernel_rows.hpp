#pragma once

// Per-row bodies of the kernels in kernels.hpp. Included by both the serial
// and the OpenMP translation units so the two differ only in loop scheduling.

#include <cmath>

#include "difsi/delta.hpp"
#include "difsi/detail/stencil.hpp"
#include "difsi/kernels.hpp"

namespace difsi::kernels::detail {

using difsi::detail::Mean;
using difsi::detail::StencilContext;
using difsi::detail::ux_at;
using difsi::detail::uy_at;

inline StencilContext stencil(const FieldContext& c) { return {c.grid, c.layout, c.boundary}; }

// Divergence-form convection (u.grad)u = div(u u) on the staggered grid with
// linearly interpolated transport velocities.
inline double convect_row(const StencilContext& c, const double* u, int row) {
  const double ihx = 1.0 / c.grid.hx;
  const double ihy = 1.0 / c.grid.hy;
  if (c.layout.is_ux(row)) {
    const auto [a, b] = c.layout.ux_face(row);
    const double ue = Mean(ux_at(c, a, b), ux_at(c, a + 1, b)).eval(u);
    const double uw = Mean(ux_at(c, a - 1, b), ux_at(c, a, b)).eval(u);
    const double un = Mean(ux_at(c, a, b), ux_at(c, a, b + 1)).eval(u);
    const double vn = Mean(uy_at(c, a - 1, b + 1), uy_at(c, a, b + 1)).eval(u);
    const double us = Mean(ux_at(c, a, b - 1), ux_at(c, a, b)).eval(u);
    const double vs = Mean(uy_at(c, a - 1, b), uy_at(c, a, b)).eval(u);
    return (ue * ue - uw * uw) * ihx + (un * vn - us * vs) * ihy;
  }
  const auto [a, b] = c.layout.uy_face(row);
  const double vn = Mean(uy_at(c, a, b), uy_at(c, a, b + 1)).eval(u);
  const double vs = Mean(uy_at(c, a, b - 1), uy_at(c, a, b)).eval(u);
  const double ue = Mean(ux_at(c, a + 1, b - 1), ux_at(c, a + 1, b)).eval(u);
  const double ve = Mean(uy_at(c, a, b), uy_at(c, a + 1, b)).eval(u);
  const double uw = Mean(ux_at(c, a, b - 1), ux_at(c, a, b)).eval(u);
  const double vw = Mean(uy_at(c, a - 1, b), uy_at(c, a, b)).eval(u);
  return (ue * ve - uw * vw) * ihx + (vn * vn - vs * vs) * ihy;
}

struct RowAccumulator {
  int* count;
  int* cols;
  double* vals;

  void add(int col, double v) {
    for (int k = 0; k < *count; ++k) {
      if (cols[k] == col) {
        vals[k] += v;
        return;
      }
    }
    cols[*count] = col;
    vals[*count] = v;
    ++*count;
  }

  // d/du of  w * p * q  with p, q affine means.
  void product(const Mean& p, const Mean& q, double w, const double* u) {
    const double pv = p.eval(u);
    const double qv = q.eval(u);
    for (int k = 0; k < 2; ++k) {
      if (p.index[k] >= 0) add(p.index[k], w * p.coef[k] * qv);
      if (q.index[k] >= 0) add(q.index[k], w * q.coef[k] * pv);
    }
  }
};

inline void convect_jacobian_row(const StencilContext& c, const double* u, int row,
                                 SparseRows& out) {
  const std::size_t base = static_cast<std::size_t>(row) * SparseRows::kRowCapacity;
  RowAccumulator acc{&out.count[static_cast<std::size_t>(row)], &out.cols[base], &out.vals[base]};
  *acc.count = 0;
  const double ihx = 1.0 / c.grid.hx;
  const double ihy = 1.0 / c.grid.hy;
  if (c.layout.is_ux(row)) {
    const auto [a, b] = c.layout.ux_face(row);
    const Mean ue(ux_at(c, a, b), ux_at(c, a + 1, b));
    const Mean uw(ux_at(c, a - 1, b), ux_at(c, a, b));
    const Mean un(ux_at(c, a, b), ux_at(c, a, b + 1));
    const Mean vn(uy_at(c, a - 1, b + 1), uy_at(c, a, b + 1));
    const Mean us(ux_at(c, a, b - 1), ux_at(c, a, b));
    const Mean vs(uy_at(c, a - 1, b), uy_at(c, a, b));
    acc.product(ue, ue, ihx, u);
    acc.product(uw, uw, -ihx, u);
    acc.product(un, vn, ihy, u);
    acc.product(us, vs, -ihy, u);
    return;
  }
  const auto [a, b] = c.layout.uy_face(row);
  const Mean vn(uy_at(c, a, b), uy_at(c, a, b + 1));
  const Mean vs(uy_at(c, a, b - 1), uy_at(c, a, b));
  const Mean ue(ux_at(c, a + 1, b - 1), ux_at(c, a + 1, b));
  const Mean ve(uy_at(c, a, b), uy_at(c, a + 1, b));
  const Mean uw(ux_at(c, a, b - 1), ux_at(c, a, b));
  const Mean vw(uy_at(c, a - 1, b), uy_at(c, a, b));
  acc.product(ue, ve, ihx, u);
  acc.product(uw, vw, -ihx, u);
  acc.product(vn, vn, ihy, u);
  acc.product(vs, vs, -ihy, u);
}

// Row `row` of E: rows [0, n) interpolate u_x at node row, rows [n, 2n) u_y.
// A row whose kernel support touches a non-unknown face gets count = -1.
inline void interpolation_row(const FieldContext& c, NodeSet nodes, int row, SparseRows& out) {
  const int n = static_cast<int>(nodes.positions.size());
  const bool x_component = row < n;
  const Vec2 p = nodes.positions[static_cast<std::size_t>(x_component ? row : row - n)];
  const GridSpec& g = c.grid;
  const std::size_t base = static_cast<std::size_t>(row) * SparseRows::kRowCapacity;
  int& count = out.count[static_cast<std::size_t>(row)];
  count = 0;
  // Sample offsets: u_x at (a, b + 1/2), u_y at (a + 1/2, b).
  const double sx = x_component ? 0.0 : 0.5;
  const double sy = x_component ? 0.5 : 0.0;
  const double fx = (p.x - g.origin.x) / g.hx - sx;
  const double fy = (p.y - g.origin.y) / g.hy - sy;
  if (!std::isfinite(fx) || !std::isfinite(fy)) {
    count = -1;
    return;
  }
  const int a0 = static_cast<int>(std::floor(fx)) - 1;
  const int b0 = static_cast<int>(std::floor(fy)) - 1;
  for (int b = b0; b <= b0 + 3; ++b) {
    const double wy = DeltaKernel::weight(b - fy);
    if (wy == 0.0) continue;
    for (int a = a0; a <= a0 + 3; ++a) {
      const double wx = DeltaKernel::weight(a - fx);
      if (wx == 0.0) continue;
      const bool inside = x_component ? (b >= 0 && b < g.ny) : (a >= 0 && a < g.nx);
      const int col = !inside ? -1 : (x_component ? c.layout.ux_index(a, b) : c.layout.uy_index(a, b));
      if (col < 0) {
        count = -1;
        return;
      }
      out.cols[base + static_cast<std::size_t>(count)] = col;
      out.vals[base + static_cast<std::size_t>(count)] = wx * wy;
      ++count;
    }
  }
}

inline double corner_vorticity_at(const StencilContext& c, const double* u, int a, int b) {
  const double dvdx = (difsi::detail::value(uy_at(c, a, b), u) -
                       difsi::detail::value(uy_at(c, a - 1, b), u)) /
                      c.grid.hx;
  const double dudy = (difsi::detail::value(ux_at(c, a, b), u) -
                       difsi::detail::value(ux_at(c, a, b - 1), u)) /
                      c.grid.hy;
  return dvdx - dudy;
}

}  // namespace difsi::kernels::detail
