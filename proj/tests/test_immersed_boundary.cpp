#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "difsi/immersed_boundary.hpp"
#include "test_helpers.hpp"

using namespace difsi;
using namespace testing;

namespace {

FluidOperators unit_ops(const DomainBoundaryConditions& bc = DomainBoundaryConditions::free_stream({1.0, 0.0})) {
  return build_operators(GridSpec::uniform(20, 16, 2.0, 1.6, {-1.0, -0.8}), bc);
}

BoundaryMesh ring(int n, double radius, Vec2 center = {0.013, -0.021}) {
  BoundaryMesh m;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * (k + 0.37) / n;
    m.positions.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
    m.velocities.push_back({});
  }
  m.spacing = 2.0 * M_PI * radius / n;
  return m;
}

}  // namespace

TEST_CASE("node on a sample point gives a unit row") {
  const auto ops = unit_ops();
  BoundaryMesh m;
  m.positions = {ops.grid.ux_position(10, 8)};
  m.velocities = {{}};
  m.spacing = 0.1;
  const Matrix E = Matrix(interpolation_matrix(m, ops));
  CHECK(E.row(0).maxCoeff() == doctest::Approx(DeltaKernel::weight(0.0) * DeltaKernel::weight(0.0)));
  // The 3-point kernel spreads to neighbours even at a sample point; the
  // centred weight is 4/9 and the row still sums to one.
  CHECK(E.row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(E(0, ops.layout.ux_index(10, 8)) == doctest::Approx(4.0 / 9.0));
}

TEST_CASE("rows form a partition of unity and reproduce linear fields") {
  const auto ops = unit_ops();
  const BoundaryMesh m = ring(29, 0.31);
  const SparseMatrix E = interpolation_matrix(m, ops);
  CHECK(E.rows() == m.n_b());
  CHECK(E.cols() == ops.n_u());
  const Vector sums = E * Vector::Ones(ops.n_u());
  CHECK((sums.array() - 1.0).abs().maxCoeff() < 1e-12);

  auto linear = [](Vec2 p) { return Vec2{0.3 + 1.7 * p.x - 0.4 * p.y, -1.1 + 0.2 * p.x + 2.3 * p.y}; };
  const Vector eu = E * sample_velocity(ops, linear);
  for (int i = 0; i < m.size(); ++i) {
    const Vec2 exact = linear(m.positions[static_cast<std::size_t>(i)]);
    CHECK(std::abs(eu[i] - exact.x) <= 1e-10);
    CHECK(std::abs(eu[m.size() + i] - exact.y) <= 1e-10);
  }
  const Vector c = E * sample_velocity(ops, [](Vec2) { return Vec2{2.5, -0.5}; });
  CHECK((c.head(m.size()).array() - 2.5).abs().maxCoeff() < 1e-12);
  CHECK((c.tail(m.size()).array() + 0.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("E E^T is symmetric positive semidefinite") {
  const auto ops = unit_ops();
  const BoundaryMesh m = ring(23, 0.3);
  const SparseMatrix E = interpolation_matrix(m, ops);
  const Matrix M = Matrix(E * SparseMatrix(E.transpose()));
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  CHECK(eig.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("nodes near the domain edge are rejected") {
  const auto ops = unit_ops();
  BoundaryMesh m = ring(12, 0.3);
  m.positions[3] = {ops.grid.x_max() - 1.5 * ops.grid.hx, 0.0};
  CHECK_THROWS_AS(interpolation_matrix(m, ops), NodeOutsideDomain);
  BoundaryMesh bad = ring(12, 0.3);
  bad.velocities.pop_back();
  CHECK_THROWS_AS(bad.validate(ops.grid), DimensionMismatch);
}

TEST_CASE("position derivatives match finite differences") {
  const auto ops = unit_ops();
  const BoundaryMesh m = ring(17, 0.29);
  const int n = m.size();
  const Vector u = sample_velocity(ops, [](Vec2 p) { return Vec2{std::sin(3 * p.x) * std::cos(2 * p.y), p.x * p.y}; });
  const Vector f = random_vector(m.n_b(), 31);
  const Matrix dpos = random_vector(2 * n * 2, 32).reshaped(2 * n, 2);
  const Matrix de = interpolation_position_derivative(m, ops, u, dpos);
  const Matrix ds = spread_position_derivative(m, ops, f, dpos);
  const double eps = 1e-6;
  for (int col = 0; col < 2; ++col) {
    auto moved = [&](double s) {
      BoundaryMesh q = m;
      for (int i = 0; i < n; ++i) {
        q.positions[static_cast<std::size_t>(i)].x += s * dpos(i, col);
        q.positions[static_cast<std::size_t>(i)].y += s * dpos(n + i, col);
      }
      return interpolation_matrix(q, ops);
    };
    const SparseMatrix ep = moved(eps);
    const SparseMatrix em = moved(-eps);
    const Vector fd_e = (ep * u - em * u) / (2 * eps);
    const Vector fd_s = (SparseMatrix(ep.transpose()) * f - SparseMatrix(em.transpose()) * f) / (2 * eps);
    CHECK((fd_e - de.col(col)).norm() <= 1e-6 * de.col(col).norm());
    CHECK((fd_s - ds.col(col)).norm() <= 1e-6 * ds.col(col).norm());
  }
}

TEST_CASE("boundary forces and net force") {
  const auto grid = GridSpec::uniform(4, 4, 4.0, 4.0);
  BoundaryMesh m;
  m.positions = {{2.0, 2.0}, {2.1, 2.0}, {2.2, 2.0}};
  m.velocities.resize(3);
  m.spacing = 1.0;
  FluidConfig cfg;
  SUBCASE("zero") {
    CHECK(boundary_forces(Vector::Zero(6), cfg, grid, m).lpNorm<Eigen::Infinity>() == 0.0);
    const Vec2 f = net_force(Vector::Zero(6), m);
    CHECK(f.x == 0.0);
    CHECK(f.y == 0.0);
  }
  SUBCASE("unit factors flip the sign") {
    const Vector v = random_vector(6, 2);
    CHECK((boundary_forces(v, cfg, grid, m) + v).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("physical scaling") {
    cfg.density = 997.0;
    cfg.reference_velocity = 0.1;
    m.spacing = 0.5;
    const Vector v = random_vector(6, 3);
    const Vector expected = -997.0 * 0.01 * (grid.hx * grid.hy / 0.5) * v;
    CHECK((boundary_forces(v, cfg, grid, m) - expected).lpNorm<Eigen::Infinity>() < 1e-12);
  }
  SUBCASE("constant traction integrates to n s") {
    m.spacing = 0.25;
    Vector t = Vector::Zero(6);
    t.head(3).setOnes();
    const Vec2 f = net_force(t, m);
    CHECK(f.x == doctest::Approx(3 * 0.25));
    CHECK(f.y == 0.0);
    CHECK_THROWS_AS(net_force(Vector::Zero(5), 1.0), DimensionMismatch);
  }
}
