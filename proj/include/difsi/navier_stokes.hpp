#pragma once

#include <utility>

#include "difsi/fluid_config.hpp"
#include "difsi/grid.hpp"

namespace difsi {

struct StepDiagnostics {
  int iterations = 0;
  double final_residual_norm = 0.0;
  bool converged = false;
  /// The constraint block needed the -eps I shift to factorize.
  bool regularized = false;
};

/// A = (1/dt) I - (1/(2 Re)) L.
SparseMatrix assemble_A(const FluidOperators& ops, const FluidConfig& cfg);

/// Crank-Nicolson explicit part
///   r(u_k) = [(1/dt) I + (1/(2 Re)) L] u_k - N(u_k)/2 + bc_L / Re + a_ext.
Vector explicit_rhs(const Vector& u_k, const FluidOperators& ops, const FluidConfig& cfg);

/// Same, for boundary data that changes over the step: the convection term
/// uses `now`, and bc_L is averaged over `now` and `next`.
Vector explicit_rhs(const Vector& u_k, const FluidOperators& now, const FluidOperators& next,
                    const FluidConfig& cfg);

/// One implicit step of the body-free equations by Newton iteration on the
/// momentum/continuity saddle-point system. Non-convergence is reported in
/// the diagnostics, not thrown. Throws SingularSystem when the linearized
/// system cannot be factorized.
std::pair<FluidState, StepDiagnostics> ns_step(const FluidState& state, const FluidOperators& ops,
                                               const FluidConfig& cfg);

}  // namespace difsi
