#include <doctest.h>

#include "difsi/convection.hpp"
#include "difsi/fsi.hpp"
#include "difsi/workbench.hpp"
#include "test_helpers.hpp"

using namespace difsi;
using namespace testing;

namespace {

struct CylinderCase {
  GridSpec grid = GridSpec::uniform(40, 32, 5.0, 4.0, {-1.5, -2.0});
  FluidOperators ops = build_operators(grid, DomainBoundaryConditions::free_stream({1.0, 0.0}));
  CylinderBody body{{{0.0, 0.0}, 1.0}, grid, grid.hx};
  FluidConfig cfg;

  CylinderCase() {
    cfg.reynolds = 20.0;
    cfg.dt = 0.1;
    cfg.newton_tol = 1e-10;
  }
  FluidState uniform() const {
    return {sample_velocity(ops, [](Vec2) { return Vec2{1.0, 0.0}; }), Vector::Zero(ops.n_f()), 0.0};
  }
  BoundaryMesh mesh() const { return body.sample(body.parameters(), cfg.dt).mesh; }
};

}  // namespace

TEST_CASE("KKT structure") {
  const CylinderCase c;
  const BoundaryMesh mesh = c.mesh();
  const SparseMatrix E = interpolation_matrix(mesh, c.ops);
  const int n_u = c.ops.n_u();
  const int n_f = c.ops.n_f();
  const int n_b = mesh.n_b();
  const Vector u = c.uniform().u;
  const Matrix K = Matrix(assemble_kkt(u, c.ops, c.cfg, E));
  REQUIRE(K.rows() == n_u + n_f + n_b);

  SUBCASE("constraint blocks are exact transposes") {
    CHECK(K.block(n_u, 0, n_f, n_u) == K.block(0, n_u, n_u, n_f).transpose());
    CHECK(K.block(n_u + n_f, 0, n_b, n_u) == K.block(0, n_u + n_f, n_u, n_b).transpose());
    CHECK(K.block(0, n_u, n_u, n_f) == Matrix(c.ops.G));
    CHECK(K.block(n_u + n_f, 0, n_b, n_u) == Matrix(E));
    CHECK(K.block(n_u + n_f, n_u, n_b, n_f + n_b).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("momentum block") {
    const Matrix expected = Matrix(assemble_A(c.ops, c.cfg)) + 0.5 * Matrix(convect_jacobian(u, c.ops));
    CHECK((K.topLeftCorner(n_u, n_u) - expected).cwiseAbs().maxCoeff() == 0.0);
    // Still walls: no ghost velocity, so convection drops out at rest.
    const FluidOperators still = build_operators(c.grid, DomainBoundaryConditions{});
    const Matrix at_rest =
        Matrix(assemble_kkt(Vector::Zero(still.n_u()), still, c.cfg, interpolation_matrix(mesh, still)));
    const int n_u = still.n_u();
    CHECK(at_rest.topLeftCorner(n_u, n_u) == Matrix(assemble_A(still, c.cfg)));
  }
  SUBCASE("no body drops the constraint rows") {
    const Matrix K0 = Matrix(assemble_kkt(u, c.ops, c.cfg, SparseMatrix(0, n_u)));
    CHECK(K0.rows() == n_u + n_f);
    CHECK(K0 == K.topLeftCorner(n_u + n_f, n_u + n_f));
  }
  SUBCASE("closed domains pin one pressure") {
    const auto closed = build_operators(c.grid, DomainBoundaryConditions{});
    const Matrix Kc = Matrix(assemble_kkt(Vector::Zero(closed.n_u()), closed, c.cfg, SparseMatrix(0, closed.n_u())));
    const int pin = closed.n_u() + *closed.pinned_pressure;
    CHECK(Kc(pin, pin) == 1.0);
    CHECK(Kc.block(closed.n_u(), closed.n_u(), closed.n_f(), closed.n_f()).cwiseAbs().sum() == 1.0);
  }
}

TEST_CASE("empty mesh reproduces ns_step bitwise") {
  const CylinderCase c;
  FluidState s = c.uniform();
  s.u += 0.01 * random_vector(s.u.size(), 5);
  const auto a = ns_step(s, c.ops, c.cfg);
  const auto b = fsi_step(s, BoundaryMesh{}, c.ops, c.cfg);
  CHECK(a.first.u == b.state.u);
  CHECK(a.first.p == b.state.p);
  CHECK(a.second.iterations == b.diagnostics.iterations);
  CHECK(b.dual.size() == 0);
}

TEST_CASE("cylinder at rest in still fluid stays at rest") {
  const auto grid = GridSpec::uniform(24, 24, 4.0, 4.0, {-2.0, -2.0});
  const auto ops = build_operators(grid, DomainBoundaryConditions{});
  const CylinderBody body({{0.0, 0.0}, 1.0}, grid, grid.hx);
  FluidConfig cfg;
  cfg.dt = 0.1;
  const auto r = fsi_step(FluidState::zeros(ops), body.sample(body.parameters(), cfg.dt).mesh, ops, cfg);
  CHECK(r.diagnostics.converged);
  CHECK(r.state.u.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(r.dual.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("converged step satisfies momentum, continuity and no-slip") {
  const CylinderCase c;
  const BoundaryMesh mesh = c.mesh();
  StepOptions options;
  options.keep_factorization = true;
  const auto r = fsi_step(c.uniform(), mesh, c.ops, c.cfg, options);
  REQUIRE(r.diagnostics.converged);
  CHECK(r.diagnostics.final_residual_norm <= c.cfg.newton_tol);
  CHECK(continuity_residual(c.ops, r.state.u) <= c.cfg.newton_tol);
  const SparseMatrix E = interpolation_matrix(mesh, c.ops);
  CHECK((E * r.state.u - mesh.velocity_vector()).lpNorm<Eigen::Infinity>() <= c.cfg.newton_tol);
  // Momentum residual recomputed independently.
  const Vector u = r.state.u;
  const Vector R = assemble_A(c.ops, c.cfg) * u + 0.5 * convect(u, c.ops) - explicit_rhs(c.uniform().u, c.ops, c.cfg) +
                   c.ops.G * r.state.p + SparseMatrix(E.transpose()) * r.dual;
  CHECK(R.lpNorm<Eigen::Infinity>() <= c.cfg.newton_tol);

  SUBCASE("factorization is stamped with the converged state") {
    REQUIRE(r.factorization.valid());
    CHECK_NOTHROW(r.factorization.check(u));
    Vector other = u;
    other[0] += 1e-15;
    CHECK_THROWS_AS(r.factorization.check(other), StaleFactorization);
    CHECK_THROWS_AS(KktFactorization{}.check(u), StaleFactorization);
  }
  SUBCASE("discrete Newton's third law") {
    // Momentum the multipliers remove from the fluid, integrated over cells,
    // equals the force on the body.
    const Vector spread = SparseMatrix(E.transpose()) * r.dual;
    const double cell = c.grid.hx * c.grid.hy;
    const double fluid_x = -cell * spread.head(c.ops.layout.n_ux()).sum();
    const double fluid_y = -cell * spread.tail(c.ops.layout.n_uy()).sum();
    const Vec2 body = body_force(r.dual, mesh, c.grid, c.cfg);
    CHECK(std::abs(body.x + fluid_x) <= 1e-10 * std::abs(body.x));
    CHECK(std::abs(body.y + fluid_y) <= 1e-10 * std::max(std::abs(body.x), 1.0));
    CHECK(body.x > 0.0);  // drag points downstream
  }
}

TEST_CASE("duplicated nodes are handled by the regularized retry") {
  const CylinderCase c;
  BoundaryMesh mesh = c.mesh();
  mesh.positions.push_back(mesh.positions.front());
  mesh.velocities.push_back(mesh.velocities.front());
  try {
    const auto r = fsi_step(c.uniform(), mesh, c.ops, c.cfg);
    CHECK(r.diagnostics.regularized);
  } catch (const SingularSystem&) {
    CHECK(true);  // both outcomes are allowed by the contract; silently wrong results are not
  }
}

TEST_CASE("simulate") {
  const CylinderCase c;
  SUBCASE("zero steps") {
    const auto traj = simulate(c.uniform(), &c.body, c.body.parameters(), {0.1, 0}, c.ops, c.cfg);
    CHECK(traj.steps.empty());
    CHECK(traj.final_state().u == c.uniform().u);
    CHECK(traj.cell_area == doctest::Approx(c.grid.hx * c.grid.hy));
  }
  SUBCASE("matches stepping by hand") {
    const auto traj = simulate(c.uniform(), &c.body, c.body.parameters(), {0.1, 2}, c.ops, c.cfg);
    REQUIRE(traj.steps.size() == 2);
    auto first = fsi_step(c.uniform(), c.body.sample(c.body.parameters(), 0.1).mesh, c.ops, c.cfg);
    StepOptions o;
    o.dual_guess = first.dual;
    auto second = fsi_step(first.state, c.body.sample(c.body.parameters(), 0.2).mesh, c.ops, c.cfg, o);
    CHECK(traj.steps[1].state.u == second.state.u);
    CHECK(traj.steps[1].state.t == doctest::Approx(0.2));
    CHECK_FALSE(traj.steps[0].factorization.valid());
  }
  SUBCASE("errors carry the step index") {
    FluidConfig strict = c.cfg;
    strict.newton_max_iters = 1;
    strict.newton_tol = 1e-15;
    try {
      simulate(c.uniform(), &c.body, c.body.parameters(), {0.1, 3}, c.ops, strict);
      FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
      CHECK(e.step() == 0);
    }
  }
  SUBCASE("still water and a still tail") {
    const auto grid = GridSpec::uniform(32, 32, 3.0, 3.0);
    const auto ops = build_operators(grid, DomainBoundaryConditions{});
    LinkChain chain;
    chain.base = {2.0, 1.5};
    chain.heading = M_PI;
    chain.link_lengths = {0.3, 0.3, 0.3};
    chain.joint_half_widths = {0.15, 0.12, 0.1};
    const TailBody tail(chain, GaitParams{1.0, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}, grid.hx);
    FluidConfig cfg;
    cfg.dt = 0.05;
    const auto traj = simulate(FluidState::zeros(ops), &tail, Vector(), {cfg.dt, 3}, ops, cfg);
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
      const Vec2 f = body_force(traj.steps[k].dual, traj.boundaries[k].mesh, grid, cfg);
      CHECK(f.x == 0.0);
      CHECK(f.y == 0.0);
    }
  }
}
