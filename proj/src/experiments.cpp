#include "difsi/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>

#include "difsi/convection.hpp"
#include "difsi/detail/coupled_step.hpp"

namespace difsi {

namespace {

using json = nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void prepare_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Initial flow: uniform at the inflow velocity when there is one, else rest.
FluidState initial_flow(const FluidOperators& ops) {
  FluidState s = FluidState::zeros(ops);
  for (const auto& e : ops.bc.edges) {
    if (e.kind == EdgeKind::Inflow && !e.profile) {
      const Vec2 v = e.velocity;
      s.u = sample_velocity(ops, [v](Vec2) { return v; });
      break;
    }
  }
  return s;
}

GaitParams configured_gait(const SimConfigFile& config) {
  if (!config.gait) throw ConfigError(config.source.string() + ": this run needs a sinusoidal [gait]");
  return *config.gait;
}

std::unique_ptr<Body> make_body(const SimConfigFile& config, TailBody::Parameters parameters) {
  const double spacing = config.target_spacing();
  switch (config.body) {
    case BodyKind::None:
      return nullptr;
    case BodyKind::Cylinder:
      return std::make_unique<CylinderBody>(config.cylinder, config.grid, spacing);
    case BodyKind::Tail:
      break;
  }
  if (config.profile == WidthProfile::Cubic) {
    return std::make_unique<TailBody>(config.chain, config.cubic, configured_gait(config), parameters, spacing);
  }
  if (parameters != TailBody::Parameters::None) {
    throw ConfigError(config.source.string() + ": shape parameters need 'body.profile = cubic'");
  }
  if (config.angle_file) {
    const auto trajectory = JointTrajectory::read(*config.angle_file, config.chain.links());
    // File times are physical seconds when the run is physical.
    const double factor = config.physical_units ? 1.0 / config.fluid.reference_time() : 1.0;
    return std::make_unique<TailBody>(config.chain, trajectory.rescaled_time(factor), spacing);
  }
  return std::make_unique<TailBody>(config.chain, configured_gait(config), spacing);
}

Vector body_parameters(const Body* body) {
  if (const auto* c = dynamic_cast<const CylinderBody*>(body)) return c->parameters();
  if (const auto* t = dynamic_cast<const TailBody*>(body)) return t->parameters();
  return Vector();
}

// Swimming direction: opposite to where the tail points from its base.
Vec2 swim_direction(const LinkChain& chain) { return {-std::cos(chain.heading), -std::sin(chain.heading)}; }

void write_normalized_thrust(const std::filesystem::path& path, const ForceHistory& forces,
                             const std::vector<double>& thrust) {
  const auto normalized = normalize_to_max(thrust);
  auto out = open_output(path);
  out << "t,thrust,normalized\n";
  for (std::size_t k = 0; k < thrust.size(); ++k) {
    out << format_double(forces.rows[k].t) << ',' << format_double(thrust[k]) << ','
        << format_double(normalized[k]) << '\n';
  }
}

json conservation_json(const ConservationLog& log) {
  return {{"steps", log.steps}, {"max_continuity_residual", log.continuity}, {"max_no_slip_residual", log.no_slip}};
}

std::string snapshot_name(int step, SnapshotFormat format) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fields_%06d.%s", step, format == SnapshotFormat::Csv ? "csv" : "bin");
  return buf;
}

// Steps the configured experiment without storing the trajectory.
SimulationReport march(const SimConfigFile& config, const std::filesystem::path& output, bool spin) {
  prepare_directory(output);
  ExperimentSetup setup = make_setup(config);
  const FluidOperators& ops = setup.ops;
  FluidConfig cfg = config.fluid;
  SimulationReport report;
  FluidState state = setup.initial;
  Vector dual;
  std::optional<Vec2> swim;
  if (const auto* tail = dynamic_cast<const TailBody*>(setup.body.get())) swim = swim_direction(tail->chain());

  if (config.snapshot_stride > 0) {
    write_snapshot(output / snapshot_name(0, config.snapshot_format), ops, state, config.physical_time(state.t),
                   config.snapshot_format);
  }
  double previous_cd = 0.0;
  double previous_cl = 0.0;
  for (int k = 0; k < config.n_steps; ++k) {
    cfg.dt = k < config.startup_steps ? config.startup_dt : config.fluid.dt;
    const double t_next = state.t + cfg.dt;
    BoundaryMesh mesh;
    if (setup.body) mesh = setup.body->sample(setup.theta, t_next).mesh;
    if (spin && t_next <= config.perturbation_until + 1e-12) {
      const double omega = 2.0 * config.perturbation_speed / config.cylinder.diameter;
      for (int i = 0; i < mesh.size(); ++i) {
        const Vec2 r{mesh.positions[i].x - config.cylinder.center.x, mesh.positions[i].y - config.cylinder.center.y};
        mesh.velocities[i] = {-omega * r.y, omega * r.x};
      }
    }
    StepOptions options;
    if (dual.size() == mesh.n_b()) options.dual_guess = dual;
    FsiStepResult result;
    try {
      result = fsi_step(state, mesh, ops, cfg, options);
    } catch (const SingularSystem& e) {
      throw SingularSystem(std::string(e.what()) + " (step " + std::to_string(k) + ")");
    }
    if (!result.diagnostics.converged) {
      throw NonConvergence("Newton iteration did not converge at step " + std::to_string(k) + " (residual " +
                               format_double(result.diagnostics.final_residual_norm) + ")",
                           k);
    }
    FluidOperators storage;
    report.conservation.record(detail::operators_at(ops, t_next, storage), result, mesh);
    report.newton_iterations += result.diagnostics.iterations;
    state = std::move(result.state);
    dual = std::move(result.dual);

    if (setup.body) {
      const Vec2 force = body_force(dual, mesh, ops.grid, cfg);
      const auto [cd, cl] = drag_lift_coefficients(force, cfg);
      report.forces.append({config.physical_time(state.t), force.x, force.y, cd, cl});
      if (swim) report.thrust.push_back(force.x * swim->x + force.y * swim->y);
      if (config.steady_tolerance > 0.0 && k >= config.startup_steps) {
        const double rate = std::max(std::abs(cd - previous_cd), std::abs(cl - previous_cl)) / cfg.dt;
        if (rate <= config.steady_tolerance * std::max(std::abs(cd), 1.0)) report.steady = true;
      }
      previous_cd = cd;
      previous_cl = cl;
    }
    if (config.snapshot_stride > 0 && (k + 1) % config.snapshot_stride == 0) {
      write_snapshot(output / snapshot_name(k + 1, config.snapshot_format), ops, state,
                     config.physical_time(state.t), config.snapshot_format);
    }
    std::clog << "step " << k + 1 << "/" << config.n_steps << " t=" << config.physical_time(state.t)
              << " newton=" << report.newton_iterations << '\n';
    if (report.steady) break;
  }
  if (setup.body) write_force_history(output / "forces.csv", report.forces);
  const bool positive_thrust =
      !report.thrust.empty() && *std::max_element(report.thrust.begin(), report.thrust.end()) > 0.0;
  if (positive_thrust) write_normalized_thrust(output / "thrust_normalized.csv", report.forces, report.thrust);
  return report;
}

json run_json(const SimConfigFile& config, const SimulationReport& report) {
  json j;
  j["config"] = config.source.string();
  j["reynolds"] = config.fluid.reynolds;
  j["grid"] = {{"nx", config.grid.nx}, {"ny", config.grid.ny}};
  j["steps_run"] = report.conservation.steps;
  j["newton_iterations"] = report.newton_iterations;
  j["steady"] = report.steady;
  j["conservation"] = conservation_json(report.conservation);
  if (!report.forces.rows.empty()) {
    const auto& last = report.forces.rows.back();
    j["final"] = {{"t", last.t}, {"Fx", last.fx}, {"Fy", last.fy}, {"Cd", last.cd}, {"Cl", last.cl}};
  }
  if (!report.thrust.empty()) {
    const auto& rows = report.forces.rows;
    const double interval = rows.size() > 1 ? rows[1].t - rows[0].t : 0.0;
    if (rows.size() > 2) j["thrust_dominant_frequency"] = dominant_frequency(report.thrust, interval);
    if (*std::max_element(report.thrust.begin(), report.thrust.end()) <= 0.0) {
      j["thrust_note"] = "thrust never positive; normalized history not written";
    }
  }
  return j;
}

}  // namespace

void ConservationLog::record(const FluidOperators& ops, const FsiStepResult& result, const BoundaryMesh& mesh) {
  continuity = std::max(continuity, continuity_residual(ops, result.state.u));
  if (!mesh.empty()) {
    const SparseMatrix E = interpolation_matrix(mesh, ops);
    no_slip = std::max(no_slip, (E * result.state.u - mesh.velocity_vector()).lpNorm<Eigen::Infinity>());
  }
  ++steps;
}

ExperimentSetup make_setup(const SimConfigFile& config, TailBody::Parameters parameters) {
  ExperimentSetup s;
  try {
    s.ops = build_operators(config.grid, config.boundary);
  } catch (const InvalidBoundaryConditions& e) {
    throw ConfigError(config.source.string() + ": " + e.what());
  }
  s.initial = initial_flow(s.ops);
  s.body = make_body(config, parameters);
  s.theta = body_parameters(s.body.get());
  return s;
}

SimulationReport run_simulate(const SimConfigFile& config, const std::filesystem::path& output) {
  const SimulationReport report = march(config, output, false);
  json j = run_json(config, report);
  j["mode"] = "simulate";
  write_json(output / "summary.json", j);
  return report;
}

CylinderReport run_benchmark_cylinder(const SimConfigFile& config, const std::filesystem::path& output) {
  if (config.body != BodyKind::Cylinder) {
    throw ConfigError(config.source.string() + ": benchmark-cylinder needs 'body.type = cylinder'");
  }
  CylinderReport report;
  report.run = march(config, output, true);
  json j = run_json(config, report.run);
  j["mode"] = "benchmark-cylinder";
  if (!report.run.forces.rows.empty()) {
    report.final_cd = report.run.forces.rows.back().cd;
    report.final_cl = report.run.forces.rows.back().cl;
    report.statistics = force_statistics(report.run.forces);
    j["statistics"] = {{"window", "second half"},
                       {"mean_Cd", report.statistics.mean_cd},
                       {"Cd_amplitude", report.statistics.cd_amplitude},
                       {"mean_Cl", report.statistics.mean_cl},
                       {"Cl_amplitude", report.statistics.cl_amplitude}};
    try {
      report.strouhal = strouhal_number(report.run.forces, config.fluid);
      j["strouhal"] = *report.strouhal;
    } catch (const NoOscillationDetected& e) {
      j["strouhal"] = nullptr;
      j["strouhal_note"] = e.what();
    }
  }
  write_json(output / "summary.json", j);
  return report;
}

ObjectiveProblem make_objective_problem(const SimConfigFile& config, TailBody::Parameters parameters) {
  if (config.body == BodyKind::None) throw ConfigError(config.source.string() + ": objective needs a body");
  ObjectiveProblem p;
  p.setup = make_setup(config, parameters);
  p.rollout.body = p.setup.body.get();
  p.rollout.initial = p.setup.initial;
  p.rollout.ops = p.setup.ops;
  p.rollout.cfg = config.fluid;
  p.rollout.schedule = {config.fluid.dt, config.n_steps};
  if (config.body == BodyKind::Tail && config.gait) {
    // One flap period of the initial gait.
    const double period = 1.0 / config.gait->frequency;
    p.rollout.schedule = {period / config.steps_per_period, config.steps_per_period};
  }
  p.rollout.cfg.dt = p.rollout.schedule.dt;
  p.rollout.objective.dt = p.rollout.schedule.dt;
  return p;
}

OptimizeReport run_optimize(const SimConfigFile& config, const std::filesystem::path& output) {
  if (config.body != BodyKind::Tail || config.profile != WidthProfile::Cubic) {
    throw ConfigError(config.source.string() + ": optimize needs a tail with 'body.profile = cubic'");
  }
  prepare_directory(output);
  const auto parameters = config.optimize_mode == OptimizeMode::Shape ? TailBody::Parameters::Shape
                                                                       : TailBody::Parameters::ShapeAndGait;
  const ObjectiveProblem problem = make_objective_problem(config, parameters);
  const Vector theta0 = problem.setup.theta;
  const auto n = theta0.size();
  Bounds bounds{Vector::Constant(n, -std::numeric_limits<double>::infinity()),
                Vector::Constant(n, std::numeric_limits<double>::infinity())};
  if (!config.lower_bounds.empty()) bounds.lower = to_vector(config.lower_bounds);
  if (!config.upper_bounds.empty()) bounds.upper = to_vector(config.upper_bounds);
  if (bounds.lower.size() != n || bounds.upper.size() != n) {
    throw ConfigError(config.source.string() + ": optimize bounds need " + std::to_string(n) + " entries");
  }
  if (!bounds.contains(theta0)) throw ConfigError(config.source.string() + ": initial parameters violate the bounds");

  OptimizeReport report;
  int evaluation = 0;
  const ObjectiveFunction objective = [&](const Vector& theta) {
    RolloutResult r = differentiate_rollout(problem.rollout, theta);
    for (std::size_t k = 0; k < r.trajectory.steps.size(); ++k) {
      FluidOperators storage;
      const auto& step = r.trajectory.steps[k];
      report.conservation.record(detail::operators_at(problem.rollout.ops, step.state.t, storage), step,
                                 r.trajectory.boundaries[k].mesh);
    }
    std::clog << "evaluation " << ++evaluation << " loss=" << format_double(r.loss) << '\n';
    return std::pair{r.loss, r.gradient};
  };
  BfgsOptions options;
  options.max_iters = config.optimize_max_iters;
  report.result = bfgs_optimize(objective, theta0, bounds, options);
  const double l0 = report.result.loss_history.front();
  report.improvement = l0 != 0.0 ? (l0 - report.result.loss) / std::abs(l0) : 0.0;

  auto out = open_output(output / "optimize_history.csv");
  out << "iteration,loss";
  for (Eigen::Index m = 0; m < n; ++m) out << ",theta" << m;
  out << '\n';
  for (std::size_t k = 0; k < report.result.loss_history.size(); ++k) {
    out << k << ',' << format_double(report.result.loss_history[k]);
    for (Eigen::Index m = 0; m < n; ++m) out << ',' << format_double(report.result.theta_history[k][m]);
    out << '\n';
  }
  json j;
  j["mode"] = "optimize";
  j["config"] = config.source.string();
  j["parameters"] = config.optimize_mode == OptimizeMode::Shape ? "shape" : "shape_and_gait";
  j["initial_theta"] = vector_json(theta0);
  j["final_theta"] = vector_json(report.result.theta);
  j["initial_loss"] = l0;
  j["final_loss"] = report.result.loss;
  j["relative_improvement"] = report.improvement;
  j["iterations"] = report.result.iterations;
  j["converged"] = report.result.converged;
  j["line_search_failed"] = report.result.line_search_failed;
  j["conservation"] = conservation_json(report.conservation);
  write_json(output / "summary.json", j);
  return report;
}

GradientCheckReport run_check_gradients(const SimConfigFile& config, const std::filesystem::path& output) {
  prepare_directory(output);
  TailBody::Parameters parameters = TailBody::Parameters::None;
  if (config.body == BodyKind::Tail) {
    parameters = config.optimize_mode == OptimizeMode::Shape ? TailBody::Parameters::Shape
                                                             : TailBody::Parameters::ShapeAndGait;
  }
  const ObjectiveProblem problem = make_objective_problem(config, parameters);
  const GradientCheckReport report = finite_difference_check(problem.setup.theta, problem.rollout, config.check_eps);
  auto out = open_output(output / "gradient_check.csv");
  out << "parameter,theta,analytic,finite_difference,relative_error\n";
  for (Eigen::Index m = 0; m < report.analytic.size(); ++m) {
    out << m << ',' << format_double(problem.setup.theta[m]) << ',' << format_double(report.analytic[m]) << ','
        << format_double(report.finite_difference[m]) << ',' << format_double(report.relative_error[m]) << '\n';
  }
  json j;
  j["mode"] = "check-gradients";
  j["config"] = config.source.string();
  j["eps"] = config.check_eps;
  j["tolerance"] = config.check_tolerance;
  j["max_relative_error"] = report.max_relative_error;
  j["passed"] = report.max_relative_error <= config.check_tolerance;
  write_json(output / "summary.json", j);
  return report;
}

void write_force_history(const std::filesystem::path& path, const ForceHistory& history) {
  auto out = open_output(path);
  out << "t,Fx,Fy,Cd,Cl\n";
  for (const auto& r : history.rows) {
    out << format_double(r.t) << ',' << format_double(r.fx) << ',' << format_double(r.fy) << ','
        << format_double(r.cd) << ',' << format_double(r.cl) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_snapshot(const std::filesystem::path& path, const FluidOperators& ops, const FluidState& state,
                    double time, SnapshotFormat format) {
  const CellFields f = cell_centered_fields(state.u, state.p, ops);
  const std::string header = "# nx=" + std::to_string(f.nx) + " ny=" + std::to_string(f.ny) + " t=" + format_double(time) + '\n';
  if (format == SnapshotFormat::Binary) {
    auto out = open_output(path, std::ios::out | std::ios::binary);
    out << header;
    for (const Vector* v : {&f.ux, &f.uy, &f.p, &f.vorticity}) {
      out.write(reinterpret_cast<const char*>(v->data()), static_cast<std::streamsize>(v->size() * sizeof(double)));
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
    return;
  }
  auto out = open_output(path);
  out << header << "i,j,ux,uy,p,vorticity\n";
  for (int j = 0; j < f.ny; ++j) {
    for (int i = 0; i < f.nx; ++i) {
      const int c = j * f.nx + i;
      out << i << ',' << j << ',' << format_double(f.ux[c]) << ',' << format_double(f.uy[c]) << ','
          << format_double(f.p[c]) << ',' << format_double(f.vorticity[c]) << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace difsi
