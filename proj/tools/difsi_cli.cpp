// Command-line driver: one experiment per invocation.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "difsi/experiments.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kSolverError = 3, kIoError = 4 };

struct Common {
  std::string config;
  std::string output;
  std::optional<double> reynolds;
  std::optional<int> steps;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment configuration file")->required();
  cmd->add_option("--output", c.output, "output directory (overrides [output] directory)");
  cmd->add_option("--re", c.reynolds, "Reynolds number override");
  cmd->add_option("--steps", c.steps, "number of steps override");
}

difsi::SimConfigFile load(const Common& c) {
  auto config = difsi::load_config(c.config);
  if (c.reynolds) {
    if (!(*c.reynolds > 0.0)) throw difsi::ConfigError("--re must be positive");
    config.fluid.reynolds = *c.reynolds;
  }
  if (c.steps) {
    if (*c.steps < 0) throw difsi::ConfigError("--steps must be nonnegative");
    config.n_steps = *c.steps;
  }
  if (!c.output.empty()) config.output_directory = c.output;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable immersed-boundary fluid-structure simulator"};
  app.require_subcommand(1);
  Common simulate, cylinder, optimize, check;
  add_common(app.add_subcommand("simulate", "run a configured simulation"), simulate);
  add_common(app.add_subcommand("benchmark-cylinder", "flow past a cylinder: drag, lift, Strouhal"), cylinder);
  add_common(app.add_subcommand("optimize", "BFGS on the tail thrust over one flap period"), optimize);
  add_common(app.add_subcommand("check-gradients", "analytic vs finite-difference gradients"), check);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (app.got_subcommand("simulate")) {
      const auto config = load(simulate);
      const auto report = difsi::run_simulate(config, config.output_directory);
      std::printf("steps %d, max continuity %.3e, max no-slip %.3e\n", report.conservation.steps,
                  report.conservation.continuity, report.conservation.no_slip);
    } else if (app.got_subcommand("benchmark-cylinder")) {
      const auto config = load(cylinder);
      const auto report = difsi::run_benchmark_cylinder(config, config.output_directory);
      std::printf("Re %g: mean Cd %.4f, Cl amplitude %.4f, final Cd %.4f, final Cl %.4f", config.fluid.reynolds,
                  report.statistics.mean_cd, report.statistics.cl_amplitude, report.final_cd, report.final_cl);
      if (report.strouhal) std::printf(", St %.4f", *report.strouhal);
      std::printf("\n");
    } else if (app.got_subcommand("optimize")) {
      const auto config = load(optimize);
      const auto report = difsi::run_optimize(config, config.output_directory);
      std::printf("loss %.6g -> %.6g (%.1f%% improvement) in %d iterations\n", report.result.loss_history.front(),
                  report.result.loss, 100.0 * report.improvement, report.result.iterations);
    } else {
      const auto config = load(check);
      const auto report = difsi::run_check_gradients(config, config.output_directory);
      for (Eigen::Index m = 0; m < report.analytic.size(); ++m) {
        std::printf("theta[%ld]: analytic %.10e  fd %.10e  rel %.2e\n", static_cast<long>(m), report.analytic[m],
                    report.finite_difference[m], report.relative_error[m]);
      }
      if (report.max_relative_error > config.check_tolerance) {
        std::fprintf(stderr, "gradient check failed: max relative error %.3e > %.3e\n", report.max_relative_error,
                     config.check_tolerance);
        return kSolverError;
      }
    }
  } catch (const difsi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const difsi::InvalidGrid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const difsi::BodyTooLargeForDomain& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const difsi::DimensionMismatch& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const difsi::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const difsi::Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  }
  return kOk;
}
