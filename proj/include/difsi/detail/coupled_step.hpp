#pragma once

#include "difsi/fsi.hpp"

namespace difsi::detail {

/// Newton solve shared by ns_step and fsi_step. E may have zero rows.
FsiStepResult coupled_step(const FluidState& state, const SparseMatrix& E, const Vector& boundary_velocity,
                           const FluidOperators& ops, const FluidConfig& cfg,
                           const StepOptions& options);

/// Operators with boundary data at time t (shared when boundary data is static).
const FluidOperators& operators_at(const FluidOperators& ops, double t, FluidOperators& storage);

}  // namespace difsi::detail
