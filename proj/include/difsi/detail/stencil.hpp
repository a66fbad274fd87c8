#pragma once

// Face accessors shared by operator assembly and the convection kernels.
// Every staggered value the stencils touch, including ghosts, is an affine
// function of at most one unknown.

#include "difsi/grid.hpp"

namespace difsi::detail {

struct Affine {
  double constant = 0.0;
  int index = -1;
  double coef = 0.0;
};

struct StencilContext {
  const GridSpec& grid;
  const VelocityLayout& layout;
  const BoundaryData& boundary;
};

inline Affine ux_at(const StencilContext& c, int a, int b) {
  const int nx = c.grid.nx;
  const int ny = c.grid.ny;
  if (b < 0 || b >= ny) {
    const bool bottom = b < 0;
    const Affine inner = ux_at(c, a, bottom ? 0 : ny - 1);
    const int edge = bottom ? static_cast<int>(Edge::Bottom) : static_cast<int>(Edge::Top);
    if (!c.boundary.reflect[edge]) return inner;
    const int aa = a < 0 ? 0 : (a > nx ? nx : a);
    const double wall = bottom ? c.boundary.ux_wall_bottom[aa] : c.boundary.ux_wall_top[aa];
    return {2.0 * wall - inner.constant, inner.index, -inner.coef};
  }
  if (a < 0) return ux_at(c, 0, b);
  if (a > nx) return ux_at(c, nx, b);
  const int idx = c.layout.ux_index(a, b);
  if (idx >= 0) return {0.0, idx, 1.0};
  return {c.boundary.ux_known[static_cast<std::size_t>(b * (nx + 1) + a)], -1, 0.0};
}

inline Affine uy_at(const StencilContext& c, int a, int b) {
  const int nx = c.grid.nx;
  const int ny = c.grid.ny;
  if (a < 0 || a >= nx) {
    const bool left = a < 0;
    const Affine inner = uy_at(c, left ? 0 : nx - 1, b);
    const int edge = left ? static_cast<int>(Edge::Left) : static_cast<int>(Edge::Right);
    if (!c.boundary.reflect[edge]) return inner;
    const int bb = b < 0 ? 0 : (b > ny ? ny : b);
    const double wall = left ? c.boundary.uy_wall_left[bb] : c.boundary.uy_wall_right[bb];
    return {2.0 * wall - inner.constant, inner.index, -inner.coef};
  }
  if (b < 0) return uy_at(c, a, 0);
  if (b > ny) return uy_at(c, a, ny);
  const int idx = c.layout.uy_index(a, b);
  if (idx >= 0) return {0.0, idx, 1.0};
  return {c.boundary.uy_known[static_cast<std::size_t>(b * nx + a)], -1, 0.0};
}

inline double value(const Affine& v, const double* u) {
  return v.index >= 0 ? v.constant + v.coef * u[v.index] : v.constant;
}

/// Mean of two affine values: up to two unknown terms.
struct Mean {
  double constant = 0.0;
  int index[2] = {-1, -1};
  double coef[2] = {0.0, 0.0};

  Mean(const Affine& p, const Affine& q)
      : constant(0.5 * (p.constant + q.constant)),
        index{p.index, q.index},
        coef{0.5 * p.coef, 0.5 * q.coef} {}

  double eval(const double* u) const {
    double v = constant;
    if (index[0] >= 0) v += coef[0] * u[index[0]];
    if (index[1] >= 0) v += coef[1] * u[index[1]];
    return v;
  }
};

}  // namespace difsi::detail
