#include "difsi/sensitivity.hpp"

#include <algorithm>
#include <cmath>

#include "difsi/convection.hpp"
#include "difsi/detail/coupled_step.hpp"

namespace difsi {

SensitivityState SensitivityState::zeros(int n_u, int n_f, int n_b, int n_theta) {
  return {Matrix::Zero(n_u, n_theta), Matrix::Zero(n_f, n_theta), Matrix::Zero(n_b, n_theta)};
}

SensitivityState ift_step(const FsiStepResult& result, const FluidState& previous,
                          const SensitivityState& prev_sens, const BoundarySample& boundary,
                          const FluidOperators& ops, const FluidConfig& cfg) {
  const auto& fac = result.factorization;
  fac.check(result.state.u);
  const int n_u = fac.n_u;
  const int n_f = fac.n_f;
  const int n_b = fac.n_b;
  const auto n_theta = prev_sens.du.cols();
  require_size(prev_sens.du.rows(), n_u, "ift_step (du/dtheta)");
  require_size(previous.u.size(), n_u, "ift_step (previous u)");
  require_size(boundary.mesh.n_b(), n_b, "ift_step (boundary nodes)");
  if (n_b > 0) {
    require_size(boundary.dpos.cols(), n_theta, "ift_step (boundary Jacobian)");
  }

  FluidOperators now_storage;
  FluidOperators next_storage;
  const FluidOperators& now = detail::operators_at(ops, previous.t, now_storage);
  const FluidOperators& next = detail::operators_at(ops, result.state.t, next_storage);

  Matrix rhs = Matrix::Zero(n_u + n_f + n_b, n_theta);
  if (n_theta == 0) return SensitivityState::zeros(n_u, n_f, n_b, 0);

  // dr/du_k du_k/dtheta with dr/du_k = I/dt + L/(2 Re) - dN/du(u_k)/2.
  Matrix carried = (1.0 / cfg.dt) * prev_sens.du + (0.5 / cfg.reynolds) * (now.L * prev_sens.du);
  if (cfg.convection) carried -= 0.5 * (convect_jacobian(previous.u, now) * prev_sens.du);
  rhs.topRows(n_u) = carried;

  if (n_b > 0) {
    rhs.topRows(n_u) -= spread_position_derivative(boundary.mesh, next, result.dual, boundary.dpos);
    rhs.bottomRows(n_b) =
        -(interpolation_position_derivative(boundary.mesh, next, result.state.u, boundary.dpos) - boundary.dvel);
  }

  const Matrix dz = fac.lu->solve(rhs);
  return {dz.topRows(n_u), dz.middleRows(n_u, n_f), dz.bottomRows(n_b)};
}

SensitivityState ift_step(const FsiStepResult& result, const FluidState& previous,
                          const SensitivityState& prev_sens, const Vector& theta, const Body& body,
                          const FluidOperators& ops, const FluidConfig& cfg) {
  return ift_step(result, previous, prev_sens, body.sample(theta, result.state.t), ops, cfg);
}

namespace {

std::size_t horizon_of(const Trajectory& trajectory, const ObjectiveSpec& spec) {
  if (spec.horizon < 0) return trajectory.steps.size();
  return std::min(trajectory.steps.size(), static_cast<std::size_t>(spec.horizon));
}

}  // namespace

// Per-step thrust integrand q^T f_b = -(hx hy) sum_i f_x,i, kept in product
// form s * sum(-(hx hy / s) f_x) so the spacing terms are explicit.
double objective_thrust(const Trajectory& trajectory, const ObjectiveSpec& spec, const FluidConfig&) {
  double loss = 0.0;
  const std::size_t steps = horizon_of(trajectory, spec);
  for (std::size_t k = 0; k < steps; ++k) {
    const auto& mesh = trajectory.boundaries[k].mesh;
    if (mesh.empty()) continue;
    const int n = mesh.size();
    const double s = mesh.spacing;
    const double force_x = -(trajectory.cell_area / s) * trajectory.steps[k].dual.head(n).sum();
    loss -= s * force_x * spec.dt;
  }
  return loss;
}

Vector objective_gradient(const Trajectory& trajectory, const std::vector<SensitivityState>& sens,
                          const ObjectiveSpec& spec, const FluidConfig&) {
  const std::size_t steps = horizon_of(trajectory, spec);
  if (sens.size() < steps) throw DimensionMismatch("objective_gradient: missing sensitivity states");
  const Eigen::Index n_theta = steps > 0 ? sens.front().du.cols() : 0;
  Vector grad = Vector::Zero(n_theta);
  const double area = trajectory.cell_area;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto& b = trajectory.boundaries[k];
    if (b.mesh.empty()) continue;
    const int n = b.mesh.size();
    const double s = b.mesh.spacing;
    const double sum_f = trajectory.steps[k].dual.head(n).sum();
    const Eigen::RowVectorXd dsum_f = sens[k].df.topRows(n).colwise().sum();
    // d/dtheta [ s * (-(area / s) sum_f) ]
    Eigen::RowVectorXd d = -area * dsum_f;
    if (spec.spacing_derivative && b.dspacing.size() == n_theta) {
      const Eigen::RowVectorXd from_q = b.dspacing * (-(area / s) * sum_f);
      const Eigen::RowVectorXd from_force = s * (area * sum_f / (s * s)) * b.dspacing;
      d += from_q + from_force;
    }
    grad -= spec.dt * d.transpose();
  }
  return grad;
}

RolloutResult differentiate_rollout(const RolloutSetup& setup, const Vector& theta) {
  RolloutResult out;
  FluidConfig step_cfg = setup.cfg;
  step_cfg.dt = setup.schedule.dt;
  const int n_theta = static_cast<int>(theta.size());
  SensitivityState current =
      SensitivityState::zeros(setup.ops.n_u(), setup.ops.n_f(), 0, n_theta);
  SimulateOptions options;
  options.on_step = [&](int, const FluidState& previous, const FsiStepResult& result,
                        const BoundarySample& boundary) {
    current = ift_step(result, previous, current, boundary, setup.ops, step_cfg);
    out.sensitivities.push_back(current);
  };
  out.trajectory = simulate(setup.initial, setup.body, theta, setup.schedule, setup.ops, setup.cfg, options);
  ObjectiveSpec spec = setup.objective;
  spec.dt = setup.schedule.dt;
  out.loss = objective_thrust(out.trajectory, spec, setup.cfg);
  out.gradient = objective_gradient(out.trajectory, out.sensitivities, spec, setup.cfg);
  return out;
}

double rollout_loss(const RolloutSetup& setup, const Vector& theta) {
  const Trajectory traj = simulate(setup.initial, setup.body, theta, setup.schedule, setup.ops, setup.cfg);
  ObjectiveSpec spec = setup.objective;
  spec.dt = setup.schedule.dt;
  return objective_thrust(traj, spec, setup.cfg);
}

double relative_difference(double a, double b, double floor) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  if (a == b) return 0.0;
  return std::abs(a - b) / scale;
}

GradientCheckReport finite_difference_check(const Vector& theta, const RolloutSetup& setup, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw Error("finite-difference step must lie in [1e-7, 1e-3]");
  GradientCheckReport report;
  report.analytic = differentiate_rollout(setup, theta).gradient;
  const Eigen::Index n = theta.size();
  report.finite_difference.resize(n);
  report.relative_error.resize(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double h = eps * std::max(std::abs(theta[m]), 1.0);
    Vector plus = theta;
    Vector minus = theta;
    plus[m] += h;
    minus[m] -= h;
    report.finite_difference[m] = (rollout_loss(setup, plus) - rollout_loss(setup, minus)) / (2.0 * h);
    report.relative_error[m] = relative_difference(report.analytic[m], report.finite_difference[m]);
  }
  report.max_relative_error = n > 0 ? report.relative_error.maxCoeff() : 0.0;
  return report;
}

}  // namespace difsi
