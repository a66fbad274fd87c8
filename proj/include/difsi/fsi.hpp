#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "difsi/bodies.hpp"
#include "difsi/navier_stokes.hpp"
#include "difsi/sparse_lu.hpp"

namespace difsi {

/// Factorized saddle-point matrix at a converged state, stamped with the
/// velocity it was linearized at so reuse against another state is caught.
struct KktFactorization {
  std::shared_ptr<const SparseLu> lu;
  Vector linearized_at;
  int n_u = 0;
  int n_f = 0;
  int n_b = 0;

  bool valid() const { return static_cast<bool>(lu); }
  /// Throws StaleFactorization unless valid and stamped with exactly `u`.
  void check(const Vector& u) const;
};

struct FsiStepResult {
  FluidState state;
  Vector dual;  // n_b boundary multipliers
  StepDiagnostics diagnostics;
  KktFactorization factorization;
};

/// [[A + dN/du / 2, G, E^T], [G^T, P, 0], [E, 0, 0]], where P holds a single
/// unit diagonal entry at the pinned pressure cell of closed domains.
/// Continuity rows are written as G^T u - bc_D = -(D u + bc_D).
SparseMatrix assemble_kkt(const Vector& u, const FluidOperators& ops, const FluidConfig& cfg,
                          const SparseMatrix& E);

struct StepOptions {
  /// Keep the factorization at the converged state (needed for sensitivities).
  bool keep_factorization = false;
  /// Warm start for the boundary multipliers (length n_b, or empty for zero).
  Vector dual_guess;
};

/// One coupled step: momentum, continuity and no-slip E u = u_b solved
/// together. The mesh is the prescribed boundary at t_k + dt. With an empty
/// mesh this is exactly ns_step.
FsiStepResult fsi_step(const FluidState& state, const BoundaryMesh& mesh, const FluidOperators& ops,
                       const FluidConfig& cfg, const StepOptions& options = {});

struct Schedule {
  double dt = 0.01;
  int n_steps = 0;
};

struct Trajectory {
  FluidState initial;
  /// hx * hy of the grid the rollout ran on.
  double cell_area = 0.0;
  std::vector<FsiStepResult> steps;
  /// Body sample used by step k (at the step's end time).
  std::vector<BoundarySample> boundaries;

  const FluidState& final_state() const { return steps.empty() ? initial : steps.back().state; }
};

struct SimulateOptions {
  bool keep_factorizations = false;
  /// Called after each converged step with the state it started from. The
  /// step's factorization is available here even when not kept.
  std::function<void(int step, const FluidState& previous, const FsiStepResult& result,
                     const BoundarySample& boundary)>
      on_step;
};

/// Rolls the coupled system forward. `body` may be null for body-free flow.
/// Throws NonConvergence / SingularSystem with the failing step index.
Trajectory simulate(const FluidState& initial, const Body* body, const Vector& theta,
                    const Schedule& schedule, const FluidOperators& ops, const FluidConfig& cfg,
                    const SimulateOptions& options = {});

}  // namespace difsi
