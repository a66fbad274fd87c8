#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "difsi/fsi.hpp"

namespace difsi {

/// Body force history. Times and forces are in the units of the run
/// (physical when the run was configured physically).
struct ForceHistory {
  struct Row {
    double t;
    double fx;
    double fy;
    double cd;
    double cl;
  };
  std::vector<Row> rows;

  /// Throws Error unless t is strictly larger than the last time.
  void append(const Row& row);
  std::vector<double> times() const;
  std::vector<double> lift() const;
  std::vector<double> drag() const;
};

/// (C_d, C_l) = F / (rho u_ref^2 l_ref / 2) for a physical force per unit span.
std::pair<double, double> drag_lift_coefficients(Vec2 force, const FluidConfig& cfg);

/// Force the fluid exerts on the body, in physical units per unit span.
Vec2 body_force(const Vector& dual, const BoundaryMesh& mesh, const GridSpec& grid, const FluidConfig& cfg);

/// Shedding frequency from the mean peak-to-peak period of C_l over the
/// second half of the history (times in physical units), as St = f l_ref / u_ref.
/// Throws NoOscillationDetected when the lift amplitude is below 1e-4 or
/// fewer than two peaks remain.
double strouhal_number(const ForceHistory& history, const FluidConfig& cfg);

struct ForceStatistics {
  double mean_cd = 0.0;
  double cd_amplitude = 0.0;
  double mean_cl = 0.0;
  double cl_amplitude = 0.0;
};

/// Statistics over the second half of the history.
ForceStatistics force_statistics(const ForceHistory& history);

/// Frequency of the largest non-DC spectral component of a uniformly sampled signal.
double dominant_frequency(const std::vector<double>& signal, double sample_interval);

/// Scales a signal so its maximum is exactly one.
std::vector<double> normalize_to_max(const std::vector<double>& signal);

// ---------------------------------------------------------------- BFGS

struct Bounds {
  Vector lower;
  Vector upper;

  Vector project(const Vector& x) const;
  bool contains(const Vector& x) const;
};

struct BfgsOptions {
  int max_iters = 20;
  double gradient_tol = 1e-6;
  double relative_loss_tol = 1e-8;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
};

struct BfgsResult {
  Vector theta;
  double loss = 0.0;
  /// Loss of theta_0 followed by each accepted iterate.
  std::vector<double> loss_history;
  std::vector<Vector> theta_history;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

/// Returns (loss, gradient). May throw Error for infeasible parameters,
/// which the line search treats as a failed trial.
using ObjectiveFunction = std::function<std::pair<double, Vector>(const Vector&)>;

/// Projected BFGS with backtracking Armijo search. Never accepts an iterate
/// with higher loss. Line-search failure ends the run with the best iterate
/// and line_search_failed set.
BfgsResult bfgs_optimize(const ObjectiveFunction& objective, const Vector& theta0, const Bounds& bounds,
                         const BfgsOptions& options = {});

}  // namespace difsi
