#include <doctest.h>

#include "difsi/convection.hpp"
#include "difsi/navier_stokes.hpp"
#include "test_helpers.hpp"

using namespace difsi;
using namespace testing;

namespace {

double kinetic_energy(const Vector& u) { return 0.5 * u.squaredNorm(); }

}  // namespace

TEST_CASE("fluid config") {
  const auto cfg = FluidConfig::from_physical(997.0, 8.9e-4, 0.1, 0.2);
  CHECK(cfg.reynolds == doctest::Approx(997.0 * 0.1 * 0.2 / 8.9e-4).epsilon(1e-15));
  CHECK(cfg.reference_time() == doctest::Approx(2.0));
  CHECK_THROWS_AS(FluidConfig::from_physical(997.0, 8.9e-4, 0.0, 0.2), ZeroReferenceVelocity);
  CHECK_THROWS_AS(FluidConfig::from_physical(-1.0, 8.9e-4, 0.1, 0.2), Error);
  FluidConfig bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.dt = 0.1;
  bad.reynolds = -3.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("assemble_A") {
  const auto grid = GridSpec::uniform(8, 8, 1.0, 1.0);
  auto ops = build_operators(grid, DomainBoundaryConditions{});
  FluidConfig cfg;
  cfg.reynolds = 100.0;

  SUBCASE("L = 0 gives I / dt") {
    FluidOperators zero = ops;
    zero.L.setZero();
    cfg.dt = 0.5;
    CHECK(dense_max_abs(assemble_A(zero, cfg) - 2.0 * SparseMatrix(Matrix::Identity(ops.n_u(), ops.n_u()).sparseView())) == 0.0);
  }
  SUBCASE("large dt limit") {
    cfg.dt = 1e300;
    CHECK(dense_max_abs(assemble_A(ops, cfg) + (0.5 / cfg.reynolds) * ops.L) < 1e-15);
  }
  SUBCASE("hand-assembled interior rows") {
    cfg.dt = 0.01;
    const Matrix A = Matrix(assemble_A(ops, cfg));
    const double h2 = grid.hx * grid.hx;
    const double nu = 1.0 / (2.0 * cfg.reynolds);
    for (int b = 2; b <= 5; ++b) {
      for (int a = 2; a <= 6; ++a) {
        const int r = ops.layout.ux_index(a, b);
        CHECK(A(r, r) == doctest::Approx(1.0 / cfg.dt + nu * 4.0 / h2).epsilon(1e-14));
        for (auto [da, db] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          CHECK(A(r, ops.layout.ux_index(a + da, b + db)) == doctest::Approx(-nu / h2).epsilon(1e-14));
        }
        CHECK(A.row(r).cwiseAbs().sum() == doctest::Approx(1.0 / cfg.dt + 8.0 * nu / h2).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("explicit_rhs") {
  FluidConfig cfg;
  cfg.reynolds = 50.0;
  cfg.dt = 0.02;
  SUBCASE("rest with resting walls") {
    const auto ops = build_operators(GridSpec::uniform(6, 5, 1.0, 1.0), DomainBoundaryConditions{});
    CHECK(explicit_rhs(Vector::Zero(ops.n_u()), ops, cfg).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("external acceleration isolates") {
    const auto ops = build_operators(GridSpec::uniform(6, 5, 1.0, 1.0), DomainBoundaryConditions{});
    cfg.external_acceleration = random_vector(ops.n_u(), 21);
    CHECK((explicit_rhs(Vector::Zero(ops.n_u()), ops, cfg) - cfg.external_acceleration).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("uniform flow") {
    // The discrete Laplacian of a constant is zero, so L u = -bc_L and the
    // Crank-Nicolson average leaves half of the boundary term.
    const Vec2 v{0.8, -0.4};
    const auto ops = build_operators(GridSpec::uniform(7, 6, 1.0, 1.0), DomainBoundaryConditions::all(EdgeCondition::far_field(v)));
    const Vector u = sample_velocity(ops, [v](Vec2) { return v; });
    CHECK((ops.L * u + ops.bc_L).lpNorm<Eigen::Infinity>() < 1e-12);
    const Vector expected = u / cfg.dt + ops.bc_L / (2.0 * cfg.reynolds);
    CHECK((explicit_rhs(u, ops, cfg) - expected).lpNorm<Eigen::Infinity>() < 1e-11);
  }
  SUBCASE("direct assembly") {
    const auto ops = build_operators(GridSpec::uniform(7, 6, 1.0, 1.0), DomainBoundaryConditions::free_stream({1.0, 0.0}));
    const Vector u = random_vector(ops.n_u(), 8);
    const Vector expected =
        u / cfg.dt + (ops.L * u) / (2.0 * cfg.reynolds) - 0.5 * convect(u, ops) + ops.bc_L / cfg.reynolds;
    CHECK((explicit_rhs(u, ops, cfg) - expected).lpNorm<Eigen::Infinity>() < 1e-11);
  }
}

TEST_CASE("steady states are fixed points") {
  FluidConfig cfg;
  cfg.reynolds = 100.0;
  cfg.dt = 0.1;
  SUBCASE("uniform flow, far field everywhere") {
    const Vec2 v{1.0, 0.5};
    const auto ops = build_operators(GridSpec::uniform(8, 8, 1.0, 1.0), DomainBoundaryConditions::all(EdgeCondition::far_field(v)));
    FluidState s{sample_velocity(ops, [v](Vec2) { return v; }), Vector::Zero(ops.n_f()), 0.0};
    const Vector u0 = s.u;
    for (int k = 0; k < 3; ++k) {
      auto [next, diag] = ns_step(s, ops, cfg);
      CHECK(diag.converged);
      s = next;
    }
    CHECK((s.u - u0).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(s.t == doctest::Approx(0.3));
  }
  SUBCASE("rest") {
    const auto ops = build_operators(GridSpec::uniform(6, 6, 1.0, 1.0), DomainBoundaryConditions{});
    auto [next, diag] = ns_step(FluidState::zeros(ops), ops, cfg);
    CHECK(diag.converged);
    CHECK(next.u.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(next.p.lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("Taylor-Green energy decay and continuity") {
  const double re = 1.0;
  FluidConfig cfg;
  cfg.reynolds = re;
  cfg.dt = 0.01;
  const auto ops = build_operators(taylor_green_grid(64), taylor_green_boundary(re));
  FluidState s{sample_velocity(ops, [re](Vec2 p) { return taylor_green(p, 0.0, re); }), Vector::Zero(ops.n_f()), 0.0};
  const double e0 = kinetic_energy(s.u);
  for (int k = 0; k < 50; ++k) {
    auto [next, diag] = ns_step(s, ops, cfg);
    REQUIRE(diag.converged);
    CHECK(diag.final_residual_norm <= cfg.newton_tol);
    CHECK(continuity_residual(ops.at_time(next.t), next.u) <= cfg.newton_tol);
    s = next;
  }
  const double ratio = kinetic_energy(s.u) / e0;
  CHECK(ratio == doctest::Approx(std::exp(-4.0 * s.t / re)).epsilon(0.02));
}

TEST_CASE("second order in time") {
  const double re = 10.0;
  const auto ops = build_operators(taylor_green_grid(16), taylor_green_boundary(re));
  const Vector u0 = sample_velocity(ops, [re](Vec2 p) { return taylor_green(p, 0.0, re); });
  auto march = [&](int steps) {
    FluidConfig cfg;
    cfg.reynolds = re;
    cfg.dt = 0.8 / steps;
    cfg.newton_tol = 1e-12;
    FluidState s{u0, Vector::Zero(ops.n_f()), 0.0};
    for (int k = 0; k < steps; ++k) s = ns_step(s, ops, cfg).first;
    return s.u;
  };
  // Same grid, so the spatial error cancels against the fine-step reference.
  const Vector reference = march(256);
  const double coarse = (march(8) - reference).norm();
  const double fine = (march(16) - reference).norm();
  CHECK(coarse / fine >= 3.0);
  CHECK(coarse / fine <= 5.0);
}

TEST_CASE("Crank-Nicolson is time-symmetric in the Stokes limit") {
  FluidConfig cfg;
  cfg.reynolds = 10.0;
  cfg.dt = 0.05;
  cfg.convection = false;
  cfg.newton_tol = 1e-12;
  const auto ops = build_operators(GridSpec::uniform(12, 10, 1.2, 1.0), DomainBoundaryConditions{});
  // Start from a divergence-free field: one Stokes step of a random field.
  FluidState s{random_vector(ops.n_u(), 17), Vector::Zero(ops.n_f()), 0.0};
  s = ns_step(s, ops, cfg).first;
  const Vector start = s.u;
  const auto forward = ns_step(s, ops, cfg).first;
  FluidConfig back = cfg;
  back.dt = -cfg.dt;
  const auto returned = ns_step(forward, ops, back).first;
  CHECK((returned.u - start).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("Newton iteration cap is reported, not thrown") {
  FluidConfig cfg;
  cfg.reynolds = 100.0;
  cfg.dt = 0.05;
  cfg.newton_max_iters = 1;
  cfg.newton_tol = 1e-13;
  const auto ops = build_operators(taylor_green_grid(16), taylor_green_boundary(cfg.reynolds));
  FluidState s{sample_velocity(ops, [](Vec2 p) { return taylor_green(p, 0.0, 100.0); }), Vector::Zero(ops.n_f()), 0.0};
  const auto [next, diag] = ns_step(s, ops, cfg);
  CHECK_FALSE(diag.converged);
  CHECK(diag.iterations == 1);
  CHECK(diag.final_residual_norm > cfg.newton_tol);
}

TEST_CASE("unpinned closed cavity is singular") {
  auto ops = build_operators(GridSpec::uniform(5, 5, 1.0, 1.0), DomainBoundaryConditions{});
  ops.pinned_pressure.reset();
  FluidConfig cfg;
  FluidState s = FluidState::zeros(ops);
  s.u = random_vector(ops.n_u(), 3, 0.1);
  CHECK_THROWS_AS(ns_step(s, ops, cfg), SingularSystem);
}
