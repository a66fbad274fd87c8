#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "difsi/config_file.hpp"
#include "difsi/sensitivity.hpp"
#include "difsi/workbench.hpp"

namespace difsi {

/// Largest residuals seen over a run.
struct ConservationLog {
  double continuity = 0.0;  // max ||D u + bc_D||_inf
  double no_slip = 0.0;     // max ||E u - u_b||_inf
  int steps = 0;

  void record(const FluidOperators& ops, const FsiStepResult& result, const BoundaryMesh& mesh);
};

/// Operators, initial state and body of a configured experiment.
struct ExperimentSetup {
  FluidOperators ops;
  FluidState initial;
  std::unique_ptr<Body> body;
  Vector theta;
};

/// `parameters` selects the free tail parameters; cylinders always expose their diameter.
ExperimentSetup make_setup(const SimConfigFile& config,
                           TailBody::Parameters parameters = TailBody::Parameters::None);

struct SimulationReport {
  ForceHistory forces;
  /// Force along the swimming direction (tails only), run units.
  std::vector<double> thrust;
  ConservationLog conservation;
  int newton_iterations = 0;
  bool steady = false;
};

/// Rolls the configured experiment forward and writes forces.csv,
/// fields_<step>.* snapshots, summary.json and, for tails, thrust_normalized.csv.
SimulationReport run_simulate(const SimConfigFile& config, const std::filesystem::path& output);

struct CylinderReport {
  SimulationReport run;
  ForceStatistics statistics;
  std::optional<double> strouhal;
  double final_cd = 0.0;
  double final_cl = 0.0;
};

/// Cylinder in free stream with an optional early spin to break symmetry.
/// Stops early once C_d and C_l settle when [benchmark] steady_tolerance is set.
CylinderReport run_benchmark_cylinder(const SimConfigFile& config, const std::filesystem::path& output);

struct OptimizeReport {
  BfgsResult result;
  ConservationLog conservation;
  /// Relative loss improvement (L0 - L*) / |L0|.
  double improvement = 0.0;
};

/// BFGS on the tail thrust over one flap period. Writes optimize_history.csv and summary.json.
OptimizeReport run_optimize(const SimConfigFile& config, const std::filesystem::path& output);

/// Rollout objective and its setup for the configured tail or cylinder.
struct ObjectiveProblem {
  ExperimentSetup setup;
  RolloutSetup rollout;
};
ObjectiveProblem make_objective_problem(const SimConfigFile& config, TailBody::Parameters parameters);

/// Analytic vs central-difference gradient of the configured rollout. Writes
/// gradient_check.csv and summary.json.
GradientCheckReport run_check_gradients(const SimConfigFile& config, const std::filesystem::path& output);

void write_force_history(const std::filesystem::path& path, const ForceHistory& history);

/// Cell-centered u_x, u_y, p and vorticity: a plain-text header line
/// "# nx ny t" followed by CSV rows i,j,ux,uy,p,vorticity or, for the binary
/// format, the four arrays as little-endian doubles (x fastest).
void write_snapshot(const std::filesystem::path& path, const FluidOperators& ops, const FluidState& state,
                    double time, SnapshotFormat format);

}  // namespace difsi
