#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "difsi/types.hpp"

namespace difsi {

/// Uniform Cartesian cell grid carrying a MAC (staggered) layout:
///   - pressure at cell centers (i + 1/2, j + 1/2),
///   - u_x on vertical faces (a, b + 1/2), a = 0..nx,
///   - u_y on horizontal faces (a + 1/2, b), b = 0..ny.
/// All coordinates are nondimensional.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double hx = 0.0;
  double hy = 0.0;
  Vec2 origin{};

  static GridSpec uniform(int nx, int ny, double width, double height, Vec2 origin = {});

  /// Throws InvalidGrid unless nx, ny >= 3 and hx, hy > 0.
  void validate() const;

  double width() const { return nx * hx; }
  double height() const { return ny * hy; }
  double x_min() const { return origin.x; }
  double y_min() const { return origin.y; }
  double x_max() const { return origin.x + width(); }
  double y_max() const { return origin.y + height(); }

  Vec2 ux_position(int a, int b) const { return {origin.x + a * hx, origin.y + (b + 0.5) * hy}; }
  Vec2 uy_position(int a, int b) const { return {origin.x + (a + 0.5) * hx, origin.y + b * hy}; }
  Vec2 cell_center(int i, int j) const {
    return {origin.x + (i + 0.5) * hx, origin.y + (j + 0.5) * hy};
  }
  Vec2 corner(int a, int b) const { return {origin.x + a * hx, origin.y + b * hy}; }

  int cell_count() const { return nx * ny; }
};

enum class Edge { Left = 0, Right = 1, Bottom = 2, Top = 3 };

enum class EdgeKind { Inflow, Outflow, FarField, Wall };

/// Condition on one edge of the rectangular domain. Dirichlet kinds (inflow,
/// far-field, wall) prescribe a velocity; an optional profile replaces the
/// constant velocity with a function of position and time.
struct EdgeCondition {
  using Profile = std::function<Vec2(Vec2 position, double t)>;

  EdgeKind kind = EdgeKind::Wall;
  Vec2 velocity{};
  Profile profile;

  static EdgeCondition inflow(Vec2 velocity) { return {EdgeKind::Inflow, velocity, {}}; }
  static EdgeCondition far_field(Vec2 velocity) { return {EdgeKind::FarField, velocity, {}}; }
  static EdgeCondition wall() { return {EdgeKind::Wall, {}, {}}; }
  static EdgeCondition outflow() { return {EdgeKind::Outflow, {}, {}}; }
  static EdgeCondition prescribed(Profile profile) {
    return {EdgeKind::FarField, {}, std::move(profile)};
  }

  bool is_dirichlet() const { return kind != EdgeKind::Outflow; }
  Vec2 velocity_at(Vec2 position, double t) const;
};

struct DomainBoundaryConditions {
  std::array<EdgeCondition, 4> edges{EdgeCondition::wall(), EdgeCondition::wall(),
                                     EdgeCondition::wall(), EdgeCondition::wall()};

  static DomainBoundaryConditions all(const EdgeCondition& condition);
  /// Free-stream setup: inflow on the left, outflow on the right, far-field top and bottom.
  static DomainBoundaryConditions free_stream(Vec2 velocity);

  EdgeCondition& operator[](Edge e) { return edges[static_cast<int>(e)]; }
  const EdgeCondition& operator[](Edge e) const { return edges[static_cast<int>(e)]; }

  bool has_outflow() const;
  bool time_dependent() const;
  void validate() const;
};

/// Mapping between staggered faces and unknown indices. Faces on Dirichlet
/// edges are known values; faces on outflow edges are unknowns. Unknowns are
/// ordered [all u_x; all u_y], each block x-fastest.
class VelocityLayout {
 public:
  VelocityLayout() = default;
  VelocityLayout(const GridSpec& grid, const DomainBoundaryConditions& bc);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int n_ux() const { return n_ux_; }
  int n_uy() const { return n_uy_; }
  int n_u() const { return n_ux_ + n_uy_; }
  int n_f() const { return nx_ * ny_; }

  /// Index of u_x face (a, b) in the unknown vector, or -1 for a known face.
  int ux_index(int a, int b) const {
    if (a < ux_a0_ || a >= ux_a1_) return -1;
    return b * ux_cols() + (a - ux_a0_);
  }
  int uy_index(int a, int b) const {
    if (b < uy_b0_ || b >= uy_b1_) return -1;
    return n_ux_ + (b - uy_b0_) * nx_ + a;
  }
  int pressure_index(int i, int j) const { return j * nx_ + i; }

  int ux_a_begin() const { return ux_a0_; }
  int ux_a_end() const { return ux_a1_; }
  int uy_b_begin() const { return uy_b0_; }
  int uy_b_end() const { return uy_b1_; }
  int ux_cols() const { return ux_a1_ - ux_a0_; }

  /// Inverse maps from unknown index to face coordinates.
  std::array<int, 2> ux_face(int index) const {
    return {index % ux_cols() + ux_a0_, index / ux_cols()};
  }
  std::array<int, 2> uy_face(int index) const {
    const int k = index - n_ux_;
    return {k % nx_, k / nx_ + uy_b0_};
  }
  bool is_ux(int index) const { return index < n_ux_; }

 private:
  int nx_ = 0;
  int ny_ = 0;
  int ux_a0_ = 0;
  int ux_a1_ = 0;
  int uy_b0_ = 0;
  int uy_b1_ = 0;
  int n_ux_ = 0;
  int n_uy_ = 0;
};

/// Prescribed values on known faces and ghost rules at one instant.
struct BoundaryData {
  double time = 0.0;
  std::vector<double> ux_known;      // (nx+1) * ny, indexed b*(nx+1)+a
  std::vector<double> uy_known;      // nx * (ny+1), indexed b*nx+a
  std::vector<double> ux_wall_bottom;  // nx+1, tangential u_x on the bottom edge
  std::vector<double> ux_wall_top;     // nx+1
  std::vector<double> uy_wall_left;    // ny+1, tangential u_y on the left edge
  std::vector<double> uy_wall_right;   // ny+1
  // Dirichlet edges reflect ghosts through the wall value; outflow copies.
  std::array<bool, 4> reflect{};
};

BoundaryData evaluate_boundary(const GridSpec& grid, const DomainBoundaryConditions& bc, double t);

/// Sparse discrete operators of the second-order finite-volume scheme:
///   Laplacian  L u + bc_L,  gradient  G p,  divergence  D u + bc_D,
/// with D = -G^T holding exactly.
struct FluidOperators {
  GridSpec grid;
  DomainBoundaryConditions bc;
  VelocityLayout layout;
  BoundaryData boundary;
  SparseMatrix L;
  SparseMatrix G;
  SparseMatrix D;
  Vector bc_L;
  Vector bc_D;
  /// Cell whose pressure is pinned to zero in closed domains.
  std::optional<int> pinned_pressure;

  int n_u() const { return layout.n_u(); }
  int n_f() const { return layout.n_f(); }
  double time() const { return boundary.time; }

  /// Same operators with boundary data (bc_L, bc_D, ghost values) evaluated at t.
  FluidOperators at_time(double t) const;
};

FluidOperators build_operators(const GridSpec& grid, const DomainBoundaryConditions& bc,
                               double t = 0.0);

struct FluidState {
  Vector u;
  Vector p;
  double t = 0.0;

  static FluidState zeros(const FluidOperators& ops, double t = 0.0);
  bool finite() const { return u.allFinite() && p.allFinite(); }
};

/// Samples a velocity function onto the staggered unknowns.
Vector sample_velocity(const FluidOperators& ops, const std::function<Vec2(Vec2)>& field);

/// ||D u + bc_D||_inf.
double continuity_residual(const FluidOperators& ops, const Vector& u);

}  // namespace difsi
