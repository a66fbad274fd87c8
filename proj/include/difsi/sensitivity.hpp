#pragma once

#include <vector>

#include "difsi/fsi.hpp"

namespace difsi {

/// d(u, p, f)/d(theta) after one step.
struct SensitivityState {
  Matrix du;  // n_u x n_theta
  Matrix dp;  // n_f x n_theta
  Matrix df;  // n_b x n_theta

  static SensitivityState zeros(int n_u, int n_f, int n_b, int n_theta);
  bool finite() const { return du.allFinite() && dp.allFinite() && df.allFinite(); }
};

/// Forward sensitivity through one converged step, reusing the step's
/// factorization: J dz = (dr/du_k) du_k - dg/dtheta. `boundary` is the body
/// sample the step was solved with; `previous` the state it started from.
/// Throws StaleFactorization if the result carries no factorization at its state.
SensitivityState ift_step(const FsiStepResult& result, const FluidState& previous,
                          const SensitivityState& prev_sens, const BoundarySample& boundary,
                          const FluidOperators& ops, const FluidConfig& cfg);

/// Same, re-sampling the body at the step's end time.
SensitivityState ift_step(const FsiStepResult& result, const FluidState& previous,
                          const SensitivityState& prev_sens, const Vector& theta, const Body& body,
                          const FluidOperators& ops, const FluidConfig& cfg);

/// Thrust functional -sum_k q^T f_b,k dt with q = [s, 0] (x components) and
/// f_b = -rho (hx hy / s) f.
struct ObjectiveSpec {
  double dt = 0.01;
  /// Number of steps summed; negative means the whole trajectory.
  int horizon = -1;
  /// Include d(s)/d(theta) in both q and the force rescaling.
  bool spacing_derivative = true;
};

double objective_thrust(const Trajectory& trajectory, const ObjectiveSpec& spec, const FluidConfig& cfg);

Vector objective_gradient(const Trajectory& trajectory, const std::vector<SensitivityState>& sens,
                          const ObjectiveSpec& spec, const FluidConfig& cfg);

/// Everything needed to roll out and differentiate one experiment.
struct RolloutSetup {
  const Body* body = nullptr;
  FluidState initial;
  FluidOperators ops;
  FluidConfig cfg;
  Schedule schedule;
  ObjectiveSpec objective;
};

struct RolloutResult {
  double loss = 0.0;
  Vector gradient;
  Trajectory trajectory;
  std::vector<SensitivityState> sensitivities;
};

/// Simulation plus forward sensitivities accumulated step by step, so
/// factorizations never outlive their step.
RolloutResult differentiate_rollout(const RolloutSetup& setup, const Vector& theta);

/// Loss only.
double rollout_loss(const RolloutSetup& setup, const Vector& theta);

struct GradientCheckReport {
  Vector analytic;
  Vector finite_difference;
  Vector relative_error;
  double max_relative_error = 0.0;
};

/// Central differences of the full rollout objective with step
/// eps * max(|theta_m|, 1) per component.
GradientCheckReport finite_difference_check(const Vector& theta, const RolloutSetup& setup, double eps);

/// |a - b| / max(|a|, |b|, floor); zero when both are zero.
double relative_difference(double a, double b, double floor = 1e-14);

}  // namespace difsi
