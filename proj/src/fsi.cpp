#include "difsi/fsi.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "difsi/convection.hpp"
#include "difsi/detail/coupled_step.hpp"

namespace difsi {

void KktFactorization::check(const Vector& u) const {
  if (!lu) throw StaleFactorization("no factorization stored for this step");
  if (linearized_at.size() != u.size() || linearized_at != u) {
    throw StaleFactorization("factorization was computed at a different state");
  }
}

namespace {

constexpr double kDualShift = 1e-10;
constexpr double kMinStep = 1.0 / 1024.0;

SparseMatrix assemble_system(const Vector& u, const FluidOperators& ops, const FluidConfig& cfg,
                             const SparseMatrix& A, const SparseMatrix& E, double dual_shift) {
  const int n_u = ops.n_u();
  const int n_f = ops.n_f();
  const int n_b = static_cast<int>(E.rows());
  SparseMatrix momentum = A;
  if (cfg.convection) momentum += 0.5 * convect_jacobian(u, ops);

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(momentum.nonZeros() + 2 * ops.G.nonZeros() +
                                     2 * E.nonZeros() + n_b + 1));
  for (int k = 0; k < momentum.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(momentum, k); it; ++it) {
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int k = 0; k < ops.G.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(ops.G, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      t.emplace_back(r, n_u + c, it.value());
      t.emplace_back(n_u + c, r, it.value());
    }
  }
  for (int k = 0; k < E.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(E, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      t.emplace_back(n_u + n_f + r, c, it.value());
      t.emplace_back(c, n_u + n_f + r, it.value());
    }
  }
  if (ops.pinned_pressure) {
    const int cell = n_u + *ops.pinned_pressure;
    t.emplace_back(cell, cell, 1.0);
  }
  if (dual_shift != 0.0) {
    for (int i = 0; i < n_b; ++i) t.emplace_back(n_u + n_f + i, n_u + n_f + i, -dual_shift);
  }
  const int n = n_u + n_f + n_b;
  SparseMatrix K(n, n);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();
  return K;
}

void check_step_config(const FluidConfig& cfg) {
  if (!(cfg.reynolds > 0.0) || !std::isfinite(cfg.reynolds)) throw Error("Reynolds number must be positive");
  if (cfg.dt == 0.0 || !std::isfinite(cfg.dt)) throw Error("time step must be nonzero and finite");
  if (!(cfg.newton_tol > 0.0)) throw Error("newton_tol must be positive");
  if (cfg.newton_max_iters < 1) throw Error("newton_max_iters must be at least 1");
}

// Residual blocks of the coupled step for the unknown z = [u; p; f].
struct StepSystem {
  const FluidOperators& next;
  const FluidConfig& cfg;
  const SparseMatrix& E;
  const Vector& boundary_velocity;
  SparseMatrix A;
  Vector rhs;
  int n_u;
  int n_f;
  int n_b;

  Vector residual(const Vector& z) const {
    const auto u = z.head(n_u);
    const auto p = z.segment(n_u, n_f);
    Vector res(z.size());
    Vector momentum = A * u + next.G * p - rhs;
    if (cfg.convection) momentum += 0.5 * convect(Vector(u), next);
    if (n_b > 0) momentum += E.transpose() * z.tail(n_b);
    res.head(n_u) = momentum;
    // G^T u - bc_D, identical to -(D u + bc_D).
    res.segment(n_u, n_f) = -(next.D * u + next.bc_D);
    if (next.pinned_pressure) res[n_u + *next.pinned_pressure] += p[*next.pinned_pressure];
    if (n_b > 0) res.tail(n_b) = E * u - boundary_velocity;
    return res;
  }

  double norm(const Vector& res) const {
    double m = res.head(n_u).lpNorm<Eigen::Infinity>();
    m = std::max(m, res.segment(n_u, n_f).lpNorm<Eigen::Infinity>());
    if (n_b > 0) m = std::max(m, res.tail(n_b).lpNorm<Eigen::Infinity>());
    return m;
  }

  // 2-norm with momentum rows in velocity units, so an impulsive start does not
  // reject the full step.
  double merit(const Vector& res) const {
    Vector scaled = res;
    scaled.head(n_u) *= cfg.dt;
    return scaled.norm();
  }

  // Factorizes the Jacobian at u, shifting the dual block once if needed.
  std::shared_ptr<const SparseLu> factorize(const Vector& u, bool& regularized) const {
    try {
      return std::make_shared<const SparseLu>(assemble_system(u, next, cfg, A, E, 0.0));
    } catch (const SingularSystem&) {
      if (n_b == 0) throw;
    }
    regularized = true;
    return std::make_shared<const SparseLu>(assemble_system(u, next, cfg, A, E, kDualShift));
  }
};

}  // namespace

SparseMatrix assemble_kkt(const Vector& u, const FluidOperators& ops, const FluidConfig& cfg,
                          const SparseMatrix& E) {
  require_size(u.size(), ops.n_u(), "assemble_kkt (u)");
  if (E.rows() > 0) require_size(E.cols(), ops.n_u(), "assemble_kkt (E columns)");
  return assemble_system(u, ops, cfg, assemble_A(ops, cfg), E, 0.0);
}

namespace detail {

const FluidOperators& operators_at(const FluidOperators& ops, double t, FluidOperators& storage) {
  if (!ops.bc.time_dependent()) return ops;
  storage = ops.at_time(t);
  return storage;
}

FsiStepResult coupled_step(const FluidState& state, const SparseMatrix& E,
                           const Vector& boundary_velocity, const FluidOperators& ops,
                           const FluidConfig& cfg, const StepOptions& options) {
  check_step_config(cfg);
  const int n_u = ops.n_u();
  const int n_f = ops.n_f();
  const int n_b = static_cast<int>(E.rows());
  require_size(state.u.size(), n_u, "step (u)");
  require_size(state.p.size(), n_f, "step (p)");
  if (n_b > 0) {
    require_size(E.cols(), n_u, "step (E columns)");
    require_size(boundary_velocity.size(), n_b, "step (boundary velocity)");
  }
  if (!state.finite()) throw Error("step: state is not finite");

  FluidOperators now_storage;
  FluidOperators next_storage;
  const FluidOperators& now = operators_at(ops, state.t, now_storage);
  const FluidOperators& next = operators_at(ops, state.t + cfg.dt, next_storage);

  StepSystem sys{next, cfg, E, boundary_velocity, assemble_A(next, cfg),
                 explicit_rhs(state.u, now, next, cfg), n_u, n_f, n_b};

  Vector z(n_u + n_f + n_b);
  z.head(n_u) = state.u;
  z.segment(n_u, n_f) = state.p;
  if (n_b > 0) {
    if (options.dual_guess.size() == n_b) {
      z.tail(n_b) = options.dual_guess;
    } else {
      z.tail(n_b).setZero();
    }
  }

  StepDiagnostics diag;
  Vector res = sys.residual(z);
  double res_norm = sys.norm(res);
  double res_l2 = sys.merit(res);
  while (res_norm > cfg.newton_tol && diag.iterations < cfg.newton_max_iters) {
    const auto lu = sys.factorize(z.head(n_u), diag.regularized);
    const Vector dz = lu->solve(Vector(-res));
    if (!dz.allFinite()) throw SingularSystem("Newton direction is not finite");
    ++diag.iterations;
    double alpha = 1.0;
    Vector trial = z + dz;
    Vector trial_res = sys.residual(trial);
    // Backtrack until the merit does not grow.
    while (!(trial_res.allFinite() && sys.merit(trial_res) <= res_l2) && alpha > kMinStep) {
      alpha *= 0.5;
      trial = z + alpha * dz;
      trial_res = sys.residual(trial);
    }
    if (!(trial_res.allFinite() && sys.merit(trial_res) <= res_l2)) break;
    z = std::move(trial);
    res = std::move(trial_res);
    res_norm = sys.norm(res);
    res_l2 = sys.merit(res);
  }
  diag.final_residual_norm = res_norm;
  diag.converged = res_norm <= cfg.newton_tol;

  FsiStepResult out;
  out.state = {z.head(n_u), z.segment(n_u, n_f), state.t + cfg.dt};
  out.dual = z.tail(n_b);
  out.diagnostics = diag;
  if (options.keep_factorization && diag.converged) {
    bool regularized = false;
    out.factorization.lu = sys.factorize(out.state.u, regularized);
    out.factorization.linearized_at = out.state.u;
    out.factorization.n_u = n_u;
    out.factorization.n_f = n_f;
    out.factorization.n_b = n_b;
    out.diagnostics.regularized = out.diagnostics.regularized || regularized;
  }
  return out;
}

}  // namespace detail

FsiStepResult fsi_step(const FluidState& state, const BoundaryMesh& mesh, const FluidOperators& ops,
                       const FluidConfig& cfg, const StepOptions& options) {
  if (mesh.empty()) {
    const SparseMatrix no_constraints(0, ops.n_u());
    return detail::coupled_step(state, no_constraints, Vector(), ops, cfg, options);
  }
  FluidOperators storage;
  const FluidOperators& next = detail::operators_at(ops, state.t + cfg.dt, storage);
  const SparseMatrix E = interpolation_matrix(mesh, next);
  return detail::coupled_step(state, E, mesh.velocity_vector(), ops, cfg, options);
}

Trajectory simulate(const FluidState& initial, const Body* body, const Vector& theta,
                    const Schedule& schedule, const FluidOperators& ops, const FluidConfig& cfg,
                    const SimulateOptions& options) {
  if (schedule.n_steps < 0) throw Error("simulate: negative step count");
  FluidConfig step_cfg = cfg;
  step_cfg.dt = schedule.dt;
  Trajectory traj;
  traj.initial = initial;
  traj.cell_area = ops.grid.hx * ops.grid.hy;
  traj.steps.reserve(static_cast<std::size_t>(schedule.n_steps));
  traj.boundaries.reserve(static_cast<std::size_t>(schedule.n_steps));

  const bool need_factorization = options.keep_factorizations || static_cast<bool>(options.on_step);
  for (int k = 0; k < schedule.n_steps; ++k) {
    const FluidState& previous = k == 0 ? traj.initial : traj.steps.back().state;
    const double t_next = previous.t + schedule.dt;
    BoundarySample boundary;
    if (body) boundary = body->sample(theta, t_next);

    StepOptions step_options;
    step_options.keep_factorization = need_factorization;
    if (k > 0 && traj.steps.back().dual.size() == boundary.mesh.n_b()) {
      step_options.dual_guess = traj.steps.back().dual;
    }
    FsiStepResult result;
    try {
      result = fsi_step(previous, boundary.mesh, ops, step_cfg, step_options);
    } catch (const SingularSystem& e) {
      throw SingularSystem("step " + std::to_string(k) + ": " + e.what());
    } catch (const NodeOutsideDomain& e) {
      throw NodeOutsideDomain("step " + std::to_string(k) + ": " + e.what());
    }
    if (!result.diagnostics.converged) {
      throw NonConvergence("Newton iteration did not converge at step " + std::to_string(k) +
                               " (residual " + std::to_string(result.diagnostics.final_residual_norm) +
                               ")",
                           k);
    }
    if (options.on_step) options.on_step(k, previous, result, boundary);
    if (!options.keep_factorizations) result.factorization = {};
    traj.steps.push_back(std::move(result));
    traj.boundaries.push_back(std::move(boundary));
  }
  return traj;
}

}  // namespace difsi
