#include "difsi/navier_stokes.hpp"

#include "difsi/convection.hpp"
#include "difsi/detail/coupled_step.hpp"

namespace difsi {

SparseMatrix assemble_A(const FluidOperators& ops, const FluidConfig& cfg) {
  SparseMatrix identity(ops.n_u(), ops.n_u());
  identity.setIdentity();
  SparseMatrix A = (1.0 / cfg.dt) * identity - (0.5 / cfg.reynolds) * ops.L;
  A.makeCompressed();
  return A;
}

Vector explicit_rhs(const Vector& u_k, const FluidOperators& now, const FluidOperators& next,
                    const FluidConfig& cfg) {
  require_size(u_k.size(), now.n_u(), "explicit_rhs");
  Vector r = (1.0 / cfg.dt) * u_k + (0.5 / cfg.reynolds) * (now.L * u_k) +
             (0.5 / cfg.reynolds) * (now.bc_L + next.bc_L);
  if (cfg.convection) r -= 0.5 * convect(u_k, now);
  if (cfg.external_acceleration.size() > 0) {
    require_size(cfg.external_acceleration.size(), now.n_u(), "external acceleration");
    r += cfg.external_acceleration;
  }
  return r;
}

Vector explicit_rhs(const Vector& u_k, const FluidOperators& ops, const FluidConfig& cfg) {
  return explicit_rhs(u_k, ops, ops, cfg);
}

std::pair<FluidState, StepDiagnostics> ns_step(const FluidState& state, const FluidOperators& ops,
                                               const FluidConfig& cfg) {
  const SparseMatrix no_constraints(0, ops.n_u());
  auto result = detail::coupled_step(state, no_constraints, Vector(), ops, cfg, {});
  return {std::move(result.state), result.diagnostics};
}

}  // namespace difsi
