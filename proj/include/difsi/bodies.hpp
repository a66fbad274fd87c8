#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "difsi/immersed_boundary.hpp"

namespace difsi {

/// Boundary mesh at one instant together with its parameter Jacobians.
struct BoundarySample {
  BoundaryMesh mesh;
  Matrix dpos;                  // n_b x n_theta
  Matrix dvel;                  // n_b x n_theta
  Eigen::RowVectorXd dspacing;  // 1 x n_theta
};

/// A parametric, kinematically prescribed body.
class Body {
 public:
  virtual ~Body() = default;
  virtual int parameter_count() const = 0;
  /// Boundary nodes, velocities and d/dtheta at time t.
  virtual BoundarySample sample(const Vector& theta, double t) const = 0;
};

struct CylinderShape {
  Vec2 center{};
  double diameter = 1.0;
};

/// n_b/2 = round(pi d / spacing) nodes evenly on the circle, at rest.
/// Throws BodyTooLargeForDomain when the circle plus kernel margin leaves the grid.
BoundaryMesh cylinder_boundary(const CylinderShape& shape, const GridSpec& grid,
                               double target_spacing);

/// Stationary cylinder; theta = [diameter]. The node count is fixed at
/// construction so the mesh is differentiable in the diameter.
class CylinderBody final : public Body {
 public:
  CylinderBody(CylinderShape shape, const GridSpec& grid, double target_spacing);
  int parameter_count() const override { return 1; }
  BoundarySample sample(const Vector& theta, double t) const override;
  Vector parameters() const { return Vector::Constant(1, shape_.diameter); }
  int node_count() const { return nodes_; }

 private:
  CylinderShape shape_;
  GridSpec grid_;
  int nodes_ = 0;
};

struct GaitParams {
  double frequency = 1.0;
  std::vector<double> amplitudes;
  std::vector<double> phases;

  void validate() const;
};

struct JointMotion {
  Vector angles;
  Vector rates;
};

/// theta_j(t) = a_j sin(2 pi f t + phi_j) and its exact time derivative.
JointMotion gait_angles(const GaitParams& gait, double t);

/// Serial chain of rigid links starting at `base`. Joint j sits at the start
/// of link j; its angle is relative to link j-1 (link 0: relative to `heading`).
/// Half-widths are given at joints 0..n-1; the last link is a 1D fin.
struct LinkChain {
  Vec2 base{};
  double heading = 0.0;
  std::vector<double> link_lengths;
  std::vector<double> joint_half_widths;

  int links() const { return static_cast<int>(link_lengths.size()); }
  double trunk_length() const;
  void validate() const;
  /// Joint positions P_0..P_n for the given angles.
  std::vector<Vec2> joint_positions(const Vector& angles) const;

  /// Ten-link tail used for the cavity replication (meters).
  static LinkChain reference_tail(Vec2 base, double heading);
};

/// Cubic half-width profile w(l) = c0 + c1 l + c2 l^2 + c3 l^3 over the
/// normalized trunk coordinate l in [0, 1].
struct CubicProfile {
  std::array<double, 4> c{};
  double w_min = 0.0;

  double operator()(double l) const { return c[0] + l * (c[1] + l * (c[2] + l * c[3])); }
  /// Throws Error when w(l) < w_min somewhere on [0, 1].
  void validate() const;
};

/// Joint-angle time series: time followed by one angle per joint per row.
class JointTrajectory {
 public:
  JointTrajectory(std::vector<double> times, std::vector<std::vector<double>> angles);
  /// Whitespace-separated text; '#' starts a comment.
  static JointTrajectory read(const std::filesystem::path& path, int joints);

  int joints() const { return static_cast<int>(splines_.size()); }
  double start() const { return t0_; }
  double end() const { return t1_; }
  /// Cubic B-spline interpolation of angles and their exact derivative.
  JointMotion at(double t) const;
  /// Rescales time, e.g. from seconds to nondimensional units.
  JointTrajectory rescaled_time(double factor) const;

 private:
  struct Spline;
  std::vector<double> times_;
  std::vector<std::vector<double>> angles_;
  std::vector<std::shared_ptr<const Spline>> splines_;
  double t0_ = 0.0;
  double t1_ = 0.0;
};

/// Where a node sits on the tail: link, fraction along the link, normalized
/// trunk coordinate for the width, and side factor in [-1, 1].
struct TailNode {
  int link = 0;
  double tau = 0.0;
  double ell = 0.0;
  double side = 0.0;
};

/// Fixed sampling pattern of the tail outline: a closed loop (left side,
/// tip edge, right side, base edge) around the trunk followed by an open
/// line of nodes along the fin.
struct TailOutline {
  std::vector<TailNode> nodes;
  int loop_nodes = 0;
  double fin_length = 0.0;

  static TailOutline build(const LinkChain& chain, double root_half_width, double tip_half_width,
                           double target_spacing);
};

/// Boundary mesh of the chain with half-widths linearly interpolated between joints.
BoundaryMesh tail_forward_kinematics(const LinkChain& chain, const Vector& joint_angles,
                                     const Vector& joint_rates, double target_spacing);

/// Articulated tail with either joint-interpolated or cubic half-widths,
/// driven by a sinusoidal gait or a recorded joint trajectory.
class TailBody final : public Body {
 public:
  enum class Parameters { None, Shape, ShapeAndGait };

  /// Replication tail: joint widths from `chain`, motion from a trajectory.
  TailBody(LinkChain chain, JointTrajectory trajectory, double target_spacing);
  /// Replication tail driven by a gait.
  TailBody(LinkChain chain, GaitParams gait, double target_spacing);
  /// Optimization tail: cubic half-width profile; theta = [c0..c3] or [c0..c3, f].
  TailBody(LinkChain chain, CubicProfile profile, GaitParams gait, Parameters parameters,
           double target_spacing);

  int parameter_count() const override;
  BoundarySample sample(const Vector& theta, double t) const override;

  /// Initial parameter vector for the selected parametrization.
  Vector parameters() const;
  const TailOutline& outline() const { return outline_; }
  const LinkChain& chain() const { return chain_; }

 private:
  double half_width(double ell, const Vector& theta) const;
  Eigen::RowVectorXd half_width_gradient(double ell) const;

  LinkChain chain_;
  std::optional<CubicProfile> profile_;
  std::optional<GaitParams> gait_;
  std::optional<JointTrajectory> trajectory_;
  Parameters parameters_ = Parameters::None;
  TailOutline outline_;
  std::vector<double> joint_ell_;
};

/// Parameter Jacobians of node positions and velocities at (theta, t).
inline std::pair<Matrix, Matrix> boundary_jacobian(const Body& body, const Vector& theta, double t) {
  auto s = body.sample(theta, t);
  return {std::move(s.dpos), std::move(s.dvel)};
}

}  // namespace difsi
