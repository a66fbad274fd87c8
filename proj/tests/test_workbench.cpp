#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "difsi/experiments.hpp"
#include "test_helpers.hpp"

using namespace difsi;
using namespace testing;

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("difsi_wb_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const char* kSmallCylinder = R"(
[grid]
nx = 24
ny = 24
extent = -2 4 -3 3

[fluid]
re = 20
dt = 0.1
n_steps = 3

[boundary_conditions]
left = inflow 1 0
right = outflow
bottom = far_field 1 0
top = far_field 1 0

[body]
type = cylinder
center_x = 0
center_y = 0
diameter = 1

[output]
snapshot_stride = 1
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("drag and lift coefficients") {
  FluidConfig cfg;
  cfg.density = 2.0;
  cfg.reference_velocity = 3.0;
  cfg.reference_length = 0.5;
  const auto [cd0, cl0] = drag_lift_coefficients({0.0, 0.0}, cfg);
  CHECK(cd0 == 0.0);
  CHECK(cl0 == 0.0);
  const double q = 0.5 * 2.0 * 9.0 * 0.5;
  const auto [cd, cl] = drag_lift_coefficients({q, -0.5 * q}, cfg);
  CHECK(cd == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cl == doctest::Approx(-0.5).epsilon(1e-15));
  cfg.reference_velocity = 0.0;
  CHECK_THROWS_AS(drag_lift_coefficients({1.0, 0.0}, cfg), ZeroReferenceVelocity);
}

TEST_CASE("Strouhal number") {
  FluidConfig cfg;
  cfg.reference_velocity = 2.0;
  cfg.reference_length = 0.5;
  const double t_ref = cfg.reference_time();
  ForceHistory h;
  for (int k = 0; k <= 4000; ++k) {
    const double t = 0.02 * k * t_ref;
    h.append({t, 0.0, 0.0, 1.4, 0.37 * std::sin(2.0 * kPi * 0.167 * t / t_ref)});
  }
  CHECK(strouhal_number(h, cfg) == doctest::Approx(0.167).epsilon(1e-3 / 0.167));

  const ForceStatistics s = force_statistics(h);
  CHECK(s.mean_cd == doctest::Approx(1.4));
  CHECK(s.cl_amplitude == doctest::Approx(0.37).epsilon(1e-3));

  ForceHistory steady;
  for (int k = 0; k <= 200; ++k) steady.append({0.1 * k, 0.0, 0.0, 1.7, 1e-6 * std::sin(0.3 * k)});
  CHECK_THROWS_AS(strouhal_number(steady, cfg), NoOscillationDetected);
}

TEST_CASE("force history ordering and signal helpers") {
  ForceHistory h;
  h.append({0.0, 1.0, 0.0, 0.0, 0.0});
  h.append({0.1, 1.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(h.append({0.1, 1.0, 0.0, 0.0, 0.0}), Error);
  CHECK_THROWS_AS(h.append({0.05, 1.0, 0.0, 0.0, 0.0}), Error);
  CHECK(h.times() == std::vector<double>{0.0, 0.1});

  std::vector<double> signal;
  for (int k = 0; k < 400; ++k) {
    const double t = k / 240.0;
    signal.push_back(0.2 + std::sin(2.0 * kPi * 3.0 * t) + 0.3 * std::sin(2.0 * kPi * 7.5 * t));
  }
  CHECK(dominant_frequency(signal, 1.0 / 240.0) == doctest::Approx(3.0).epsilon(0.01));
  const auto n = normalize_to_max(signal);
  CHECK(*std::max_element(n.begin(), n.end()) == 1.0);
  CHECK(n[7] == doctest::Approx(signal[7] / *std::max_element(signal.begin(), signal.end())));
}

TEST_CASE("BFGS") {
  SUBCASE("convex quadratic") {
    Matrix A(4, 4);
    A << 4, 1, 0, 0.5, 1, 3, 0.2, 0, 0, 0.2, 2, 0.1, 0.5, 0, 0.1, 1;
    const Vector b = (Vector(4) << 1.0, -2.0, 0.5, 3.0).finished();
    const Vector x_star = A.ldlt().solve(b);
    const ObjectiveFunction f = [&](const Vector& x) {
      return std::pair<double, Vector>{0.5 * x.dot(A * x) - b.dot(x), A * x - b};
    };
    BfgsOptions opt;
    opt.max_iters = 20;
    opt.gradient_tol = 1e-10;
    opt.relative_loss_tol = 0.0;
    const BfgsResult r = bfgs_optimize(f, Vector::Zero(4), {}, opt);
    CHECK(r.iterations <= 20);
    CHECK((r.theta - x_star).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("Rosenbrock") {
    const ObjectiveFunction f = [](const Vector& x) {
      const double a = 1.0 - x[0];
      const double b = x[1] - x[0] * x[0];
      Vector g(2);
      g << -2.0 * a - 400.0 * x[0] * b, 200.0 * b;
      return std::pair<double, Vector>{a * a + 100.0 * b * b, g};
    };
    BfgsOptions opt;
    opt.max_iters = 200;
    opt.gradient_tol = 1e-10;
    opt.relative_loss_tol = 0.0;
    const BfgsResult r = bfgs_optimize(f, (Vector(2) << -1.2, 1.0).finished(), {}, opt);
    CHECK(std::abs(r.theta[0] - 1.0) <= 1e-6);
    CHECK(std::abs(r.theta[1] - 1.0) <= 1e-6);
    for (std::size_t k = 1; k < r.loss_history.size(); ++k) CHECK(r.loss_history[k] <= r.loss_history[k - 1]);
    CHECK(r.loss_history.size() == r.theta_history.size());
  }
  SUBCASE("bounds and infeasible trials") {
    // Unconstrained minimum at (2, -3); box [-1, 1]^2 puts it at (1, -1).
    int calls = 0;
    const ObjectiveFunction f = [&](const Vector& x) {
      ++calls;
      if (x[0] > 1.0 + 1e-12) throw Error("outside");
      Vector g(2);
      g << 2.0 * (x[0] - 2.0), 2.0 * (x[1] + 3.0);
      return std::pair<double, Vector>{(x[0] - 2.0) * (x[0] - 2.0) + (x[1] + 3.0) * (x[1] + 3.0), g};
    };
    const Bounds box{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)};
    const BfgsResult r = bfgs_optimize(f, Vector::Zero(2), box);
    CHECK(box.contains(r.theta));
    CHECK(r.theta[0] == doctest::Approx(1.0));
    CHECK(r.theta[1] == doctest::Approx(-1.0));
    for (std::size_t k = 1; k < r.loss_history.size(); ++k) CHECK(r.loss_history[k] <= r.loss_history[k - 1]);
    CHECK(box.project((Vector(2) << 5.0, -5.0).finished()) == (Vector(2) << 1.0, -1.0).finished());
  }
  SUBCASE("flat function with a wrong gradient fails the line search") {
    const ObjectiveFunction f = [](const Vector& x) {
      return std::pair<double, Vector>{x.squaredNorm(), -Vector::Ones(x.size())};
    };
    const BfgsResult r = bfgs_optimize(f, Vector::Zero(2), {});
    CHECK(r.line_search_failed);
    CHECK(r.loss == 0.0);
  }
}

TEST_CASE("configuration parsing") {
  SUBCASE("valid nondimensional file") {
    const SimConfigFile c = parse_config(kSmallCylinder, "test.ini");
    CHECK(c.grid.nx == 24);
    CHECK(c.grid.hx == doctest::Approx(0.25));
    CHECK(c.grid.origin.x == -2.0);
    CHECK(c.fluid.reynolds == 20.0);
    CHECK(c.n_steps == 3);
    CHECK(c.body == BodyKind::Cylinder);
    CHECK(c.boundary[Edge::Right].kind == EdgeKind::Outflow);
    CHECK(c.boundary[Edge::Left].velocity.x == 1.0);
    CHECK_FALSE(c.physical_units);
  }
  SUBCASE("missing Reynolds number names the field") {
    std::string text = kSmallCylinder;
    text.replace(text.find("re = 20\n"), 8, "");
    const std::string msg = error_of(text);
    CHECK(msg.find("fluid.re") != std::string::npos);
  }
  SUBCASE("unknown key reports its line") {
    std::string text = kSmallCylinder;
    text.replace(text.find("n_steps = 3"), 11, "n_stepz = 3");
    const std::string msg = error_of(text);
    CHECK(msg.find("n_stepz") != std::string::npos);
    CHECK(msg.find("test.ini:10") != std::string::npos);
    CHECK(error_of(std::string(kSmallCylinder) + "[extras]\nfoo = 1\n").find("extras") != std::string::npos);
  }
  SUBCASE("Reynolds number and physical properties are exclusive") {
    std::string text = kSmallCylinder;
    text.replace(text.find("re = 20"), 7, "re = 20\nrho = 997\nmu = 8.9e-4\nu_ref = 0.1\nl_ref = 0.2");
    CHECK_FALSE(error_of(text).empty());
  }
  SUBCASE("physical units are converted") {
    std::string text = kSmallCylinder;
    text.replace(text.find("re = 20"), 7, "rho = 1000\nmu = 0.001\nu_ref = 0.1\nl_ref = 0.2");
    text.replace(text.find("extent = -2 4 -3 3"), 18, "extent = -0.4 0.8 -0.6 0.6");
    text.replace(text.find("dt = 0.1"), 8, "dt = 0.02");
    text.replace(text.find("inflow 1 0"), 10, "inflow 0.1 0");
    text.replace(text.find("diameter = 1"), 12, "diameter = 0.2");
    const SimConfigFile c = parse_config(text, "test.ini");
    CHECK(c.physical_units);
    CHECK(c.fluid.reynolds == doctest::Approx(20000.0));
    CHECK(c.fluid.reference_time() == doctest::Approx(2.0));
    CHECK(c.fluid.dt == doctest::Approx(0.01));
    CHECK(c.grid.hx == doctest::Approx(0.25));
    CHECK(c.grid.origin.x == doctest::Approx(-2.0));
    CHECK(c.cylinder.diameter == doctest::Approx(1.0));
    CHECK(c.boundary[Edge::Left].velocity.x == doctest::Approx(1.0));
    CHECK(c.physical_time(1.5) == doctest::Approx(3.0));
  }
  SUBCASE("bad values") {
    std::string text = kSmallCylinder;
    text.replace(text.find("nx = 24"), 7, "nx = many");
    CHECK(error_of(text).find("grid.nx") != std::string::npos);
    text = kSmallCylinder;
    text.replace(text.find("outflow"), 7, "sideways");
    CHECK_FALSE(error_of(text).empty());
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_config("/nonexistent/difsi.ini"), IoError);
  }
}

TEST_CASE("runs are deterministic") {
  const SimConfigFile c = parse_config(kSmallCylinder, "test.ini");
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const SimulationReport ra = run_simulate(c, a);
  run_simulate(c, b);
  CHECK(ra.forces.rows.size() == 3);
  CHECK(ra.conservation.continuity <= 1e-8);
  CHECK(ra.conservation.no_slip <= 1e-8);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const fs::path other = b / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
    ++compared;
  }
  CHECK(compared >= 5);  // forces, summary, three snapshots
  const std::string forces = slurp(a / "forces.csv");
  CHECK(forces.rfind("t,Fx,Fy,Cd,Cl\n", 0) == 0);
  const std::string snap = slurp(a / "fields_000001.csv");
  CHECK(snap.find("i,j,ux,uy,p,vorticity") != std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

#ifdef DIFSI_CLI
TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(DIFSI_CLI) + " " + args + " > " + (dir / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  std::string text = kSmallCylinder;
  text.replace(text.find("re = 20\n"), 8, "");
  std::ofstream(dir / "no_re.ini") << text;
  CHECK(run("simulate --config " + (dir / "no_re.ini").string()) == 2);
  CHECK(slurp(dir / "log.txt").find("fluid.re") != std::string::npos);
  CHECK(run("simulate --config " + (dir / "missing.ini").string()) == 4);
  CHECK(run("simulate") == 2);
  std::ofstream(dir / "ok.ini") << kSmallCylinder;
  CHECK(run("simulate --config " + (dir / "ok.ini").string() + " --steps 1 --output " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "summary.json"));
  fs::remove_all(dir);
}
#endif
