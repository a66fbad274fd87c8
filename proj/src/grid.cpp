#include "difsi/grid.hpp"

#include <cmath>
#include <string>

#include "difsi/detail/stencil.hpp"

namespace difsi {

using detail::Affine;
using detail::StencilContext;
using detail::ux_at;
using detail::uy_at;

GridSpec GridSpec::uniform(int nx, int ny, double width, double height, Vec2 origin) {
  GridSpec g{nx, ny, nx > 0 ? width / nx : 0.0, ny > 0 ? height / ny : 0.0, origin};
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (nx < 3 || ny < 3) {
    throw InvalidGrid("grid must have at least 3x3 cells, got " + std::to_string(nx) + "x" +
                      std::to_string(ny));
  }
  if (!(hx > 0.0) || !(hy > 0.0) || !std::isfinite(hx) || !std::isfinite(hy)) {
    throw InvalidGrid("cell sizes must be positive and finite");
  }
}

Vec2 EdgeCondition::velocity_at(Vec2 position, double t) const {
  if (kind == EdgeKind::Outflow) return {};
  if (kind == EdgeKind::Wall && !profile) return {};
  return profile ? profile(position, t) : velocity;
}

DomainBoundaryConditions DomainBoundaryConditions::all(const EdgeCondition& condition) {
  DomainBoundaryConditions bc;
  bc.edges.fill(condition);
  return bc;
}

DomainBoundaryConditions DomainBoundaryConditions::free_stream(Vec2 velocity) {
  DomainBoundaryConditions bc;
  bc[Edge::Left] = EdgeCondition::inflow(velocity);
  bc[Edge::Right] = EdgeCondition::outflow();
  bc[Edge::Bottom] = EdgeCondition::far_field(velocity);
  bc[Edge::Top] = EdgeCondition::far_field(velocity);
  return bc;
}

bool DomainBoundaryConditions::has_outflow() const {
  for (const auto& e : edges) {
    if (e.kind == EdgeKind::Outflow) return true;
  }
  return false;
}

bool DomainBoundaryConditions::time_dependent() const {
  for (const auto& e : edges) {
    if (e.profile) return true;
  }
  return false;
}

void DomainBoundaryConditions::validate() const {
  static const char* names[] = {"left", "right", "bottom", "top"};
  for (int k = 0; k < 4; ++k) {
    const auto& e = edges[static_cast<std::size_t>(k)];
    if (e.kind == EdgeKind::Outflow) {
      if (e.profile || e.velocity.x != 0.0 || e.velocity.y != 0.0) {
        throw InvalidBoundaryConditions(std::string("outflow edge '") + names[k] +
                                        "' must not prescribe a velocity");
      }
    } else if (e.kind == EdgeKind::Wall) {
      if (e.velocity.x != 0.0 || e.velocity.y != 0.0) {
        throw InvalidBoundaryConditions(std::string("wall edge '") + names[k] +
                                        "' has nonzero velocity; use far-field instead");
      }
    } else if (!std::isfinite(e.velocity.x) || !std::isfinite(e.velocity.y)) {
      throw InvalidBoundaryConditions(std::string("edge '") + names[k] +
                                      "' velocity must be finite");
    }
  }
}

VelocityLayout::VelocityLayout(const GridSpec& grid, const DomainBoundaryConditions& bc)
    : nx_(grid.nx), ny_(grid.ny) {
  ux_a0_ = bc[Edge::Left].kind == EdgeKind::Outflow ? 0 : 1;
  ux_a1_ = bc[Edge::Right].kind == EdgeKind::Outflow ? nx_ + 1 : nx_;
  uy_b0_ = bc[Edge::Bottom].kind == EdgeKind::Outflow ? 0 : 1;
  uy_b1_ = bc[Edge::Top].kind == EdgeKind::Outflow ? ny_ + 1 : ny_;
  n_ux_ = (ux_a1_ - ux_a0_) * ny_;
  n_uy_ = (uy_b1_ - uy_b0_) * nx_;
}

BoundaryData evaluate_boundary(const GridSpec& grid, const DomainBoundaryConditions& bc,
                               double t) {
  const int nx = grid.nx;
  const int ny = grid.ny;
  BoundaryData d;
  d.time = t;
  d.ux_known.assign(static_cast<std::size_t>((nx + 1) * ny), 0.0);
  d.uy_known.assign(static_cast<std::size_t>(nx * (ny + 1)), 0.0);
  d.ux_wall_bottom.assign(static_cast<std::size_t>(nx + 1), 0.0);
  d.ux_wall_top.assign(static_cast<std::size_t>(nx + 1), 0.0);
  d.uy_wall_left.assign(static_cast<std::size_t>(ny + 1), 0.0);
  d.uy_wall_right.assign(static_cast<std::size_t>(ny + 1), 0.0);
  for (int k = 0; k < 4; ++k) d.reflect[static_cast<std::size_t>(k)] = bc.edges[static_cast<std::size_t>(k)].is_dirichlet();

  const auto& left = bc[Edge::Left];
  const auto& right = bc[Edge::Right];
  const auto& bottom = bc[Edge::Bottom];
  const auto& top = bc[Edge::Top];

  for (int b = 0; b < ny; ++b) {
    if (left.is_dirichlet()) {
      d.ux_known[static_cast<std::size_t>(b * (nx + 1))] = left.velocity_at(grid.ux_position(0, b), t).x;
    }
    if (right.is_dirichlet()) {
      d.ux_known[static_cast<std::size_t>(b * (nx + 1) + nx)] =
          right.velocity_at(grid.ux_position(nx, b), t).x;
    }
  }
  for (int a = 0; a < nx; ++a) {
    if (bottom.is_dirichlet()) {
      d.uy_known[static_cast<std::size_t>(a)] = bottom.velocity_at(grid.uy_position(a, 0), t).y;
    }
    if (top.is_dirichlet()) {
      d.uy_known[static_cast<std::size_t>(ny * nx + a)] = top.velocity_at(grid.uy_position(a, ny), t).y;
    }
  }
  for (int a = 0; a <= nx; ++a) {
    const double x = grid.origin.x + a * grid.hx;
    d.ux_wall_bottom[static_cast<std::size_t>(a)] = bottom.velocity_at({x, grid.y_min()}, t).x;
    d.ux_wall_top[static_cast<std::size_t>(a)] = top.velocity_at({x, grid.y_max()}, t).x;
  }
  for (int b = 0; b <= ny; ++b) {
    const double y = grid.origin.y + b * grid.hy;
    d.uy_wall_left[static_cast<std::size_t>(b)] = left.velocity_at({grid.x_min(), y}, t).y;
    d.uy_wall_right[static_cast<std::size_t>(b)] = right.velocity_at({grid.x_max(), y}, t).y;
  }
  return d;
}

namespace {

// Accumulates weight * value into one operator row.
struct RowBuilder {
  int row;
  std::vector<Triplet>* triplets;
  double constant = 0.0;

  void add(const Affine& v, double w) {
    constant += w * v.constant;
    if (v.index >= 0 && triplets) triplets->emplace_back(row, v.index, w * v.coef);
  }
};

void assemble_laplacian(const StencilContext& c, std::vector<Triplet>* triplets, Vector& bc_L) {
  const auto& layout = c.layout;
  const double ihx2 = 1.0 / (c.grid.hx * c.grid.hx);
  const double ihy2 = 1.0 / (c.grid.hy * c.grid.hy);
  bc_L.setZero(layout.n_u());
  for (int row = 0; row < layout.n_u(); ++row) {
    RowBuilder r{row, triplets};
    if (layout.is_ux(row)) {
      const auto [a, b] = layout.ux_face(row);
      r.add(ux_at(c, a - 1, b), ihx2);
      r.add(ux_at(c, a + 1, b), ihx2);
      r.add(ux_at(c, a, b - 1), ihy2);
      r.add(ux_at(c, a, b + 1), ihy2);
      r.add(ux_at(c, a, b), -2.0 * (ihx2 + ihy2));
    } else {
      const auto [a, b] = layout.uy_face(row);
      r.add(uy_at(c, a - 1, b), ihx2);
      r.add(uy_at(c, a + 1, b), ihx2);
      r.add(uy_at(c, a, b - 1), ihy2);
      r.add(uy_at(c, a, b + 1), ihy2);
      r.add(uy_at(c, a, b), -2.0 * (ihx2 + ihy2));
    }
    bc_L[row] = r.constant;
  }
}

void assemble_divergence(const StencilContext& c, std::vector<Triplet>* triplets, Vector& bc_D) {
  const auto& layout = c.layout;
  const double ihx = 1.0 / c.grid.hx;
  const double ihy = 1.0 / c.grid.hy;
  bc_D.setZero(layout.n_f());
  for (int j = 0; j < c.grid.ny; ++j) {
    for (int i = 0; i < c.grid.nx; ++i) {
      const int row = layout.pressure_index(i, j);
      RowBuilder r{row, triplets};
      r.add(ux_at(c, i + 1, j), ihx);
      r.add(ux_at(c, i, j), -ihx);
      r.add(uy_at(c, i, j + 1), ihy);
      r.add(uy_at(c, i, j), -ihy);
      bc_D[row] = r.constant;
    }
  }
}

}  // namespace

FluidOperators build_operators(const GridSpec& grid, const DomainBoundaryConditions& bc,
                               double t) {
  grid.validate();
  bc.validate();

  FluidOperators ops;
  ops.grid = grid;
  ops.bc = bc;
  ops.layout = VelocityLayout(grid, bc);
  ops.boundary = evaluate_boundary(grid, bc, t);

  const StencilContext ctx{ops.grid, ops.layout, ops.boundary};
  const int n_u = ops.layout.n_u();
  const int n_f = ops.layout.n_f();

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(5 * n_u));
  assemble_laplacian(ctx, &triplets, ops.bc_L);
  ops.L.resize(n_u, n_u);
  ops.L.setFromTriplets(triplets.begin(), triplets.end());
  ops.L.prune(0.0);

  triplets.clear();
  assemble_divergence(ctx, &triplets, ops.bc_D);
  ops.D.resize(n_f, n_u);
  ops.D.setFromTriplets(triplets.begin(), triplets.end());
  ops.D.prune(0.0);
  ops.G = SparseMatrix(-SparseMatrix(ops.D.transpose()));
  ops.G.makeCompressed();

  if (!bc.has_outflow()) {
    ops.pinned_pressure = 0;
    const double net = ops.bc_D.sum();
    const double scale = ops.bc_D.cwiseAbs().sum() + 1.0;
    if (std::abs(net) > 1e-10 * scale) {
      throw InvalidBoundaryConditions("closed domain with nonzero net boundary flux (" +
                                      std::to_string(net) + ")");
    }
  }
  return ops;
}

FluidOperators FluidOperators::at_time(double t) const {
  FluidOperators out = *this;
  if (!bc.time_dependent()) {
    out.boundary.time = t;
    return out;
  }
  out.boundary = evaluate_boundary(grid, bc, t);
  const StencilContext ctx{out.grid, out.layout, out.boundary};
  assemble_laplacian(ctx, nullptr, out.bc_L);
  assemble_divergence(ctx, nullptr, out.bc_D);
  return out;
}

FluidState FluidState::zeros(const FluidOperators& ops, double t) {
  return {Vector::Zero(ops.n_u()), Vector::Zero(ops.n_f()), t};
}

Vector sample_velocity(const FluidOperators& ops, const std::function<Vec2(Vec2)>& field) {
  const auto& layout = ops.layout;
  Vector u(layout.n_u());
  for (int row = 0; row < layout.n_u(); ++row) {
    if (layout.is_ux(row)) {
      const auto [a, b] = layout.ux_face(row);
      u[row] = field(ops.grid.ux_position(a, b)).x;
    } else {
      const auto [a, b] = layout.uy_face(row);
      u[row] = field(ops.grid.uy_position(a, b)).y;
    }
  }
  return u;
}

double continuity_residual(const FluidOperators& ops, const Vector& u) {
  require_size(u.size(), ops.n_u(), "continuity_residual");
  return (ops.D * u + ops.bc_D).lpNorm<Eigen::Infinity>();
}

}  // namespace difsi
