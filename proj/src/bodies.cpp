#include "difsi/bodies.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace difsi {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 along(double phi) { return {std::cos(phi), std::sin(phi)}; }
Vec2 normal(double phi) { return {-std::sin(phi), std::cos(phi)}; }

double kernel_margin(const GridSpec& grid) { return 2.0 * std::max(grid.hx, grid.hy); }

}  // namespace

// ---------------------------------------------------------------- cylinder

BoundaryMesh cylinder_boundary(const CylinderShape& shape, const GridSpec& grid,
                               double target_spacing) {
  if (!(shape.diameter > 0.0)) throw Error("cylinder diameter must be positive");
  if (!(target_spacing > 0.0)) throw Error("cylinder node spacing must be positive");
  const double r = 0.5 * shape.diameter;
  const double m = kernel_margin(grid);
  if (shape.center.x - r - m < grid.x_min() || shape.center.x + r + m > grid.x_max() ||
      shape.center.y - r - m < grid.y_min() || shape.center.y + r + m > grid.y_max()) {
    throw BodyTooLargeForDomain("cylinder of diameter " + std::to_string(shape.diameter) +
                                " does not fit inside the domain with kernel margin");
  }
  const int n = std::max(3, static_cast<int>(std::lround(kPi * shape.diameter / target_spacing)));
  BoundaryMesh mesh;
  mesh.positions.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * kPi * i / n;
    mesh.positions.push_back(shape.center + r * along(phi));
  }
  mesh.velocities.assign(static_cast<std::size_t>(n), Vec2{});
  mesh.spacing = kPi * shape.diameter / n;
  return mesh;
}

CylinderBody::CylinderBody(CylinderShape shape, const GridSpec& grid, double target_spacing)
    : shape_(shape), grid_(grid) {
  nodes_ = cylinder_boundary(shape, grid, target_spacing).size();
}

BoundarySample CylinderBody::sample(const Vector& theta, double) const {
  require_size(theta.size(), 1, "cylinder parameters");
  const double d = theta[0];
  if (!(d > 0.0)) throw Error("cylinder diameter must be positive");
  const int n = nodes_;
  BoundarySample s;
  s.mesh.positions.resize(static_cast<std::size_t>(n));
  s.mesh.velocities.assign(static_cast<std::size_t>(n), Vec2{});
  s.mesh.spacing = kPi * d / n;
  s.dpos.setZero(2 * n, 1);
  s.dvel.setZero(2 * n, 1);
  s.dspacing = Eigen::RowVectorXd::Constant(1, kPi / n);
  for (int i = 0; i < n; ++i) {
    const Vec2 e = along(2.0 * kPi * i / n);
    s.mesh.positions[static_cast<std::size_t>(i)] = shape_.center + 0.5 * d * e;
    s.dpos(i, 0) = 0.5 * e.x;
    s.dpos(n + i, 0) = 0.5 * e.y;
  }
  s.mesh.validate(grid_);
  return s;
}

// ---------------------------------------------------------------- gait

void GaitParams::validate() const {
  if (!(frequency > 0.0) || !std::isfinite(frequency)) throw Error("gait frequency must be positive");
  if (amplitudes.size() != phases.size()) {
    throw DimensionMismatch("gait: amplitudes and phases differ in length");
  }
}

JointMotion gait_angles(const GaitParams& gait, double t) {
  gait.validate();
  const auto n = static_cast<Eigen::Index>(gait.amplitudes.size());
  JointMotion m{Vector(n), Vector(n)};
  const double w = 2.0 * kPi * gait.frequency;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double arg = w * t + gait.phases[static_cast<std::size_t>(j)];
    const double a = gait.amplitudes[static_cast<std::size_t>(j)];
    m.angles[j] = a * std::sin(arg);
    m.rates[j] = a * w * std::cos(arg);
  }
  return m;
}

// ---------------------------------------------------------------- chain

double LinkChain::trunk_length() const {
  double l = 0.0;
  for (int i = 0; i + 1 < links(); ++i) l += link_lengths[static_cast<std::size_t>(i)];
  return l;
}

void LinkChain::validate() const {
  if (links() < 2) throw Error("tail needs at least two links (trunk and fin)");
  if (static_cast<int>(joint_half_widths.size()) != links()) {
    throw DimensionMismatch("tail: expected one half-width per joint");
  }
  for (double l : link_lengths) {
    if (!(l > 0.0)) throw Error("tail link lengths must be positive");
  }
  for (double w : joint_half_widths) {
    if (!(w > 0.0)) throw Error("tail joint half-widths must be positive");
  }
}

std::vector<Vec2> LinkChain::joint_positions(const Vector& angles) const {
  require_size(angles.size(), links(), "joint angles");
  std::vector<Vec2> p{base};
  double phi = heading;
  for (int i = 0; i < links(); ++i) {
    phi += angles[i];
    p.push_back(p.back() + link_lengths[static_cast<std::size_t>(i)] * along(phi));
  }
  return p;
}

LinkChain LinkChain::reference_tail(Vec2 base, double heading) {
  LinkChain c;
  c.base = base;
  c.heading = heading;
  // Nine trunk segments between tracked markers, then the fin.
  c.link_lengths = {0.018, 0.018, 0.018, 0.018, 0.018, 0.018, 0.018, 0.018, 0.018, 0.045};
  c.joint_half_widths = {0.020, 0.019, 0.018, 0.0165, 0.015, 0.0135, 0.012, 0.0105, 0.009, 0.008};
  return c;
}

void CubicProfile::validate() const {
  // Sample densely plus the interior critical points of the cubic.
  auto check = [&](double l) {
    if (l < 0.0 || l > 1.0) return;
    if (!((*this)(l) >= w_min)) {
      throw Error("cubic half-width " + std::to_string((*this)(l)) + " at l = " + std::to_string(l) +
                  " is below the minimum " + std::to_string(w_min));
    }
  };
  for (int k = 0; k <= 64; ++k) check(k / 64.0);
  const double a = 3.0 * c[3];
  const double b = 2.0 * c[2];
  const double cc = c[1];
  if (a != 0.0) {
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0.0) {
      check((-b + std::sqrt(disc)) / (2.0 * a));
      check((-b - std::sqrt(disc)) / (2.0 * a));
    }
  } else if (b != 0.0) {
    check(-cc / b);
  }
}

// ---------------------------------------------------------------- trajectory

struct JointTrajectory::Spline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> s;
};

JointTrajectory::JointTrajectory(std::vector<double> times, std::vector<std::vector<double>> angles)
    : times_(std::move(times)), angles_(std::move(angles)) {
  const std::size_t n = times_.size();
  if (n < 5) throw Error("joint trajectory needs at least 5 samples");
  if (angles_.size() != n) throw DimensionMismatch("joint trajectory: one angle row per time");
  const std::size_t joints = angles_.front().size();
  if (joints == 0) throw Error("joint trajectory has no joints");
  const double step = (times_.back() - times_.front()) / static_cast<double>(n - 1);
  if (!(step > 0.0)) throw Error("joint trajectory times must increase");
  for (std::size_t i = 0; i < n; ++i) {
    if (angles_[i].size() != joints) throw DimensionMismatch("joint trajectory: ragged rows");
    const double expect = times_.front() + step * static_cast<double>(i);
    if (std::abs(times_[i] - expect) > 1e-6 * step) {
      throw Error("joint trajectory times must be uniformly spaced (row " + std::to_string(i) + ")");
    }
  }
  t0_ = times_.front();
  t1_ = times_.back();
  for (std::size_t j = 0; j < joints; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = angles_[i][j];
    splines_.push_back(std::make_shared<const Spline>(
        Spline{boost::math::interpolators::cardinal_cubic_b_spline<double>(col.begin(), col.end(), t0_, step)}));
  }
}

JointTrajectory JointTrajectory::read(const std::filesystem::path& path, int joints) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open joint trajectory file '" + path.string() + "'");
  std::vector<double> times;
  std::vector<std::vector<double>> angles;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> row;
    double v = 0.0;
    while (fields >> v) row.push_back(v);
    if (!fields.eof()) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": not a number");
    }
    if (row.empty()) continue;
    if (static_cast<int>(row.size()) != joints + 1) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                  std::to_string(joints + 1) + " columns, got " + std::to_string(row.size()));
    }
    times.push_back(row.front());
    angles.emplace_back(row.begin() + 1, row.end());
  }
  return JointTrajectory(std::move(times), std::move(angles));
}

JointMotion JointTrajectory::at(double t) const {
  const double tol = 1e-9 * (t1_ - t0_);
  if (t < t0_ - tol || t > t1_ + tol) {
    throw Error("time " + std::to_string(t) + " outside the joint trajectory [" + std::to_string(t0_) +
                ", " + std::to_string(t1_) + "]");
  }
  t = std::clamp(t, t0_, t1_);
  JointMotion m{Vector(joints()), Vector(joints())};
  for (int j = 0; j < joints(); ++j) {
    m.angles[j] = splines_[static_cast<std::size_t>(j)]->s(t);
    m.rates[j] = splines_[static_cast<std::size_t>(j)]->s.prime(t);
  }
  return m;
}

JointTrajectory JointTrajectory::rescaled_time(double factor) const {
  if (!(factor > 0.0)) throw Error("time scale factor must be positive");
  std::vector<double> times = times_;
  for (double& t : times) t *= factor;
  return JointTrajectory(std::move(times), angles_);
}

// ---------------------------------------------------------------- outline

TailOutline TailOutline::build(const LinkChain& chain, double root_half_width, double tip_half_width,
                               double target_spacing) {
  chain.validate();
  if (!(target_spacing > 0.0)) throw Error("tail node spacing must be positive");
  const int n_links = chain.links();
  const int trunk_links = n_links - 1;
  std::vector<double> ell(static_cast<std::size_t>(n_links), 0.0);
  const double trunk = chain.trunk_length();
  for (int j = 1; j < n_links; ++j) {
    ell[static_cast<std::size_t>(j)] =
        ell[static_cast<std::size_t>(j - 1)] + chain.link_lengths[static_cast<std::size_t>(j - 1)] / trunk;
  }
  ell.back() = 1.0;
  auto locate = [&](double l) {
    int m = 0;
    while (m + 1 < trunk_links && l > ell[static_cast<std::size_t>(m + 1)]) ++m;
    const double a = ell[static_cast<std::size_t>(m)];
    const double b = ell[static_cast<std::size_t>(m + 1)];
    return TailNode{m, std::clamp((l - a) / (b - a), 0.0, 1.0), l, 0.0};
  };

  TailOutline out;
  const int side = std::max(2, static_cast<int>(std::lround(trunk / target_spacing))) + 1;
  const int base_edge = std::max(0, static_cast<int>(std::lround(2.0 * root_half_width / target_spacing)) - 1);
  const int tip_edge = std::max(0, static_cast<int>(std::lround(2.0 * tip_half_width / target_spacing)) - 1);

  for (int k = 0; k < side; ++k) {
    TailNode n = locate(static_cast<double>(k) / (side - 1));
    n.side = 1.0;
    out.nodes.push_back(n);
  }
  for (int k = 1; k <= tip_edge; ++k) {
    TailNode n = locate(1.0);
    n.side = 1.0 - 2.0 * k / (tip_edge + 1);
    out.nodes.push_back(n);
  }
  for (int k = side - 1; k >= 0; --k) {
    TailNode n = locate(static_cast<double>(k) / (side - 1));
    n.side = -1.0;
    out.nodes.push_back(n);
  }
  for (int k = 1; k <= base_edge; ++k) {
    TailNode n = locate(0.0);
    n.side = -1.0 + 2.0 * k / (base_edge + 1);
    out.nodes.push_back(n);
  }
  out.loop_nodes = static_cast<int>(out.nodes.size());

  out.fin_length = chain.link_lengths.back();
  const int fin = std::max(1, static_cast<int>(std::lround(out.fin_length / target_spacing)));
  for (int k = 1; k <= fin; ++k) {
    out.nodes.push_back({trunk_links, static_cast<double>(k) / fin, 1.0, 0.0});
  }
  return out;
}

namespace {

// Link orientations, joint positions and their derivatives along the
// parameter directions that move the joints (at most the gait frequency).
struct ChainPose {
  std::vector<double> phi;
  std::vector<double> phidot;
  std::vector<Vec2> joints;
  Matrix dphi;     // links x directions
  Matrix dphidot;  // links x directions
};

ChainPose pose_chain(const LinkChain& chain, const JointMotion& motion, const Matrix& dangles,
                     const Matrix& drates) {
  const int n = chain.links();
  require_size(motion.angles.size(), n, "joint angles");
  require_size(motion.rates.size(), n, "joint rates");
  ChainPose p;
  p.phi.resize(static_cast<std::size_t>(n));
  p.phidot.resize(static_cast<std::size_t>(n));
  p.joints.push_back(chain.base);
  p.dphi.setZero(n, dangles.cols());
  p.dphidot.setZero(n, dangles.cols());
  double phi = chain.heading;
  double phidot = 0.0;
  for (int i = 0; i < n; ++i) {
    phi += motion.angles[i];
    phidot += motion.rates[i];
    p.phi[static_cast<std::size_t>(i)] = phi;
    p.phidot[static_cast<std::size_t>(i)] = phidot;
    if (dangles.cols() > 0) {
      p.dphi.row(i) = dangles.row(i) + (i > 0 ? Eigen::RowVectorXd(p.dphi.row(i - 1)) : Eigen::RowVectorXd::Zero(dangles.cols()));
      p.dphidot.row(i) = drates.row(i) + (i > 0 ? Eigen::RowVectorXd(p.dphidot.row(i - 1)) : Eigen::RowVectorXd::Zero(dangles.cols()));
    }
    p.joints.push_back(p.joints.back() + chain.link_lengths[static_cast<std::size_t>(i)] * along(phi));
  }
  return p;
}

struct NodeKinematics {
  Vec2 position;
  Vec2 velocity;
  Matrix dpos;  // 2 x directions
  Matrix dvel;
};

// X = P_m + tau L_m e(phi_m) + side w n(phi_m), with P_m = base + sum_{i<m} L_i e(phi_i).
NodeKinematics node_kinematics(const LinkChain& chain, const ChainPose& pose, const TailNode& node,
                               double half_width) {
  NodeKinematics k;
  const int dirs = static_cast<int>(pose.dphi.cols());
  k.position = pose.joints[static_cast<std::size_t>(node.link)];
  k.velocity = {};
  k.dpos.setZero(2, dirs);
  k.dvel.setZero(2, dirs);
  // Each term c v(phi_i) with v in {e, n}; v' = perp(v), v'' = -v.
  auto term = [&](int i, double c, bool use_normal) {
    const double phi = pose.phi[static_cast<std::size_t>(i)];
    const double rate = pose.phidot[static_cast<std::size_t>(i)];
    const Vec2 v = use_normal ? normal(phi) : along(phi);
    const Vec2 dv = use_normal ? -1.0 * along(phi) : normal(phi);
    if (use_normal || i == node.link) k.position = k.position + c * v;
    k.velocity = k.velocity + (c * rate) * dv;
    for (int d = 0; d < dirs; ++d) {
      const double dphi = pose.dphi(i, d);
      const double drate = pose.dphidot(i, d);
      k.dpos(0, d) += c * dv.x * dphi;
      k.dpos(1, d) += c * dv.y * dphi;
      k.dvel(0, d) += c * (-v.x * rate * dphi + dv.x * drate);
      k.dvel(1, d) += c * (-v.y * rate * dphi + dv.y * drate);
    }
  };
  for (int i = 0; i < node.link; ++i) term(i, chain.link_lengths[static_cast<std::size_t>(i)], false);
  term(node.link, node.tau * chain.link_lengths[static_cast<std::size_t>(node.link)], false);
  if (node.side != 0.0) term(node.link, node.side * half_width, true);
  return k;
}

// Loop perimeter plus fin length over the node count, and its derivative.
void spacing_from_nodes(const TailOutline& outline, const Matrix& dpos, BoundarySample& s) {
  const int n = s.mesh.size();
  double perimeter = 0.0;
  Eigen::RowVectorXd dperimeter = Eigen::RowVectorXd::Zero(dpos.cols());
  for (int i = 0; i < outline.loop_nodes; ++i) {
    const int j = (i + 1) % outline.loop_nodes;
    const Vec2 d = s.mesh.positions[static_cast<std::size_t>(j)] - s.mesh.positions[static_cast<std::size_t>(i)];
    const double len = std::hypot(d.x, d.y);
    perimeter += len;
    if (len > 0.0 && dpos.cols() > 0) {
      dperimeter += (d.x / len) * (dpos.row(j) - dpos.row(i)) + (d.y / len) * (dpos.row(n + j) - dpos.row(n + i));
    }
  }
  s.mesh.spacing = (perimeter + outline.fin_length) / n;
  s.dspacing = dperimeter / n;
}

}  // namespace

BoundaryMesh tail_forward_kinematics(const LinkChain& chain, const Vector& joint_angles,
                                     const Vector& joint_rates, double target_spacing) {
  const TailOutline outline =
      TailOutline::build(chain, chain.joint_half_widths.front(), chain.joint_half_widths.back(), target_spacing);
  const int n_links = chain.links();
  std::vector<double> ell(static_cast<std::size_t>(n_links), 0.0);
  for (int j = 1; j < n_links; ++j) {
    ell[static_cast<std::size_t>(j)] =
        ell[static_cast<std::size_t>(j - 1)] + chain.link_lengths[static_cast<std::size_t>(j - 1)] / chain.trunk_length();
  }
  const ChainPose pose = pose_chain(chain, {joint_angles, joint_rates}, Matrix(n_links, 0), Matrix(n_links, 0));
  BoundarySample s;
  for (const TailNode& node : outline.nodes) {
    const int m = std::min(node.link, n_links - 2);
    const double a = ell[static_cast<std::size_t>(m)];
    const double b = m + 1 < n_links ? ell[static_cast<std::size_t>(m + 1)] : 1.0;
    const double f = std::clamp((node.ell - a) / (b - a), 0.0, 1.0);
    const double w = (1.0 - f) * chain.joint_half_widths[static_cast<std::size_t>(m)] +
                     f * chain.joint_half_widths[static_cast<std::size_t>(m + 1)];
    const auto k = node_kinematics(chain, pose, node, w);
    s.mesh.positions.push_back(k.position);
    s.mesh.velocities.push_back(k.velocity);
  }
  spacing_from_nodes(outline, Matrix(s.mesh.n_b(), 0), s);
  return s.mesh;
}

// ---------------------------------------------------------------- tail body

namespace {

std::vector<double> joint_coordinates(const LinkChain& chain) {
  std::vector<double> ell(static_cast<std::size_t>(chain.links()), 0.0);
  for (int j = 1; j < chain.links(); ++j) {
    ell[static_cast<std::size_t>(j)] =
        ell[static_cast<std::size_t>(j - 1)] + chain.link_lengths[static_cast<std::size_t>(j - 1)] / chain.trunk_length();
  }
  ell.back() = 1.0;
  return ell;
}

}  // namespace

TailBody::TailBody(LinkChain chain, JointTrajectory trajectory, double target_spacing)
    : chain_(std::move(chain)), trajectory_(std::move(trajectory)) {
  chain_.validate();
  if (trajectory_->joints() != chain_.links()) {
    throw DimensionMismatch("joint trajectory has " + std::to_string(trajectory_->joints()) +
                            " joints, tail has " + std::to_string(chain_.links()));
  }
  outline_ = TailOutline::build(chain_, chain_.joint_half_widths.front(), chain_.joint_half_widths.back(),
                                target_spacing);
  joint_ell_ = joint_coordinates(chain_);
}

TailBody::TailBody(LinkChain chain, GaitParams gait, double target_spacing)
    : chain_(std::move(chain)), gait_(std::move(gait)) {
  chain_.validate();
  gait_->validate();
  if (static_cast<int>(gait_->amplitudes.size()) != chain_.links()) {
    throw DimensionMismatch("gait must give one amplitude per joint");
  }
  outline_ = TailOutline::build(chain_, chain_.joint_half_widths.front(), chain_.joint_half_widths.back(),
                                target_spacing);
  joint_ell_ = joint_coordinates(chain_);
}

TailBody::TailBody(LinkChain chain, CubicProfile profile, GaitParams gait, Parameters parameters,
                   double target_spacing)
    : chain_(std::move(chain)), profile_(profile), gait_(std::move(gait)), parameters_(parameters) {
  if (static_cast<int>(chain_.joint_half_widths.size()) != chain_.links()) {
    chain_.joint_half_widths.assign(static_cast<std::size_t>(chain_.links()), 1.0);
  }
  chain_.validate();
  gait_->validate();
  profile_->validate();
  if (static_cast<int>(gait_->amplitudes.size()) != chain_.links()) {
    throw DimensionMismatch("gait must give one amplitude per joint");
  }
  outline_ = TailOutline::build(chain_, (*profile_)(0.0), (*profile_)(1.0), target_spacing);
  joint_ell_ = joint_coordinates(chain_);
}

int TailBody::parameter_count() const {
  switch (parameters_) {
    case Parameters::None: return 0;
    case Parameters::Shape: return 4;
    case Parameters::ShapeAndGait: return 5;
  }
  return 0;
}

Vector TailBody::parameters() const {
  Vector theta(parameter_count());
  if (parameters_ == Parameters::None) return theta;
  for (int k = 0; k < 4; ++k) theta[k] = profile_->c[static_cast<std::size_t>(k)];
  if (parameters_ == Parameters::ShapeAndGait) theta[4] = gait_->frequency;
  return theta;
}

double TailBody::half_width(double ell, const Vector& theta) const {
  if (profile_) {
    CubicProfile p = *profile_;
    if (parameters_ != Parameters::None) {
      for (int k = 0; k < 4; ++k) p.c[static_cast<std::size_t>(k)] = theta[k];
    }
    return p(ell);
  }
  int m = 0;
  while (m + 2 < chain_.links() && ell > joint_ell_[static_cast<std::size_t>(m + 1)]) ++m;
  const double a = joint_ell_[static_cast<std::size_t>(m)];
  const double b = joint_ell_[static_cast<std::size_t>(m + 1)];
  const double f = std::clamp((ell - a) / (b - a), 0.0, 1.0);
  return (1.0 - f) * chain_.joint_half_widths[static_cast<std::size_t>(m)] +
         f * chain_.joint_half_widths[static_cast<std::size_t>(m + 1)];
}

Eigen::RowVectorXd TailBody::half_width_gradient(double ell) const {
  Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(parameter_count());
  if (parameters_ == Parameters::None) return g;
  double power = 1.0;
  for (int k = 0; k < 4; ++k) {
    g[k] = power;
    power *= ell;
  }
  return g;
}

BoundarySample TailBody::sample(const Vector& theta, double t) const {
  const int n_theta = parameter_count();
  require_size(theta.size(), n_theta, "tail parameters");
  if (profile_ && parameters_ != Parameters::None) {
    CubicProfile p = *profile_;
    for (int k = 0; k < 4; ++k) p.c[static_cast<std::size_t>(k)] = theta[k];
    p.validate();
  }

  const int n_links = chain_.links();
  JointMotion motion;
  Matrix dangles = Matrix::Zero(n_links, 0);
  Matrix drates = Matrix::Zero(n_links, 0);
  if (gait_) {
    GaitParams g = *gait_;
    if (parameters_ == Parameters::ShapeAndGait) g.frequency = theta[4];
    motion = gait_angles(g, t);
    if (parameters_ == Parameters::ShapeAndGait) {
      dangles.resize(n_links, 1);
      drates.resize(n_links, 1);
      const double w = 2.0 * kPi * g.frequency;
      for (int j = 0; j < n_links; ++j) {
        const double a = g.amplitudes[static_cast<std::size_t>(j)];
        const double arg = w * t + g.phases[static_cast<std::size_t>(j)];
        dangles(j, 0) = a * std::cos(arg) * 2.0 * kPi * t;
        drates(j, 0) = a * 2.0 * kPi * std::cos(arg) - a * w * std::sin(arg) * 2.0 * kPi * t;
      }
    }
  } else {
    motion = trajectory_->at(t);
  }
  const ChainPose pose = pose_chain(chain_, motion, dangles, drates);

  const int n = static_cast<int>(outline_.nodes.size());
  BoundarySample s;
  s.mesh.positions.resize(static_cast<std::size_t>(n));
  s.mesh.velocities.resize(static_cast<std::size_t>(n));
  s.dpos.setZero(2 * n, n_theta);
  s.dvel.setZero(2 * n, n_theta);
  for (int i = 0; i < n; ++i) {
    const TailNode& node = outline_.nodes[static_cast<std::size_t>(i)];
    const auto k = node_kinematics(chain_, pose, node, half_width(node.ell, theta));
    s.mesh.positions[static_cast<std::size_t>(i)] = k.position;
    s.mesh.velocities[static_cast<std::size_t>(i)] = k.velocity;
    if (n_theta == 0) continue;
    if (node.side != 0.0) {
      // Shape coefficients move nodes along the link normal.
      const double phi = pose.phi[static_cast<std::size_t>(node.link)];
      const double rate = pose.phidot[static_cast<std::size_t>(node.link)];
      const Vec2 nrm = normal(phi);
      const Vec2 e = along(phi);
      const Eigen::RowVectorXd g = node.side * half_width_gradient(node.ell);
      s.dpos.row(i) += nrm.x * g;
      s.dpos.row(n + i) += nrm.y * g;
      s.dvel.row(i) += -e.x * rate * g;
      s.dvel.row(n + i) += -e.y * rate * g;
    }
    if (parameters_ == Parameters::ShapeAndGait) {
      s.dpos(i, 4) += k.dpos(0, 0);
      s.dpos(n + i, 4) += k.dpos(1, 0);
      s.dvel(i, 4) += k.dvel(0, 0);
      s.dvel(n + i, 4) += k.dvel(1, 0);
    }
  }
  spacing_from_nodes(outline_, s.dpos, s);
  return s;
}

}  // namespace difsi
