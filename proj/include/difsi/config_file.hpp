#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "difsi/bodies.hpp"
#include "difsi/fluid_config.hpp"
#include "difsi/grid.hpp"

namespace difsi {

/// Schema violation in a configuration file; the message names the field
/// and, when known, the line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class BodyKind { None, Cylinder, Tail };
enum class WidthProfile { Linear, Cubic };
enum class OptimizeMode { Shape, ShapeAndGait };
enum class SnapshotFormat { Csv, Binary };

/// Parsed and unit-converted experiment description. All quantities below
/// are nondimensional except where a field says otherwise.
struct SimConfigFile {
  std::filesystem::path source;

  GridSpec grid;
  DomainBoundaryConditions boundary;
  FluidConfig fluid;
  int n_steps = 0;
  /// Physical-to-nondimensional conversion was applied.
  bool physical_units = false;

  BodyKind body = BodyKind::None;
  CylinderShape cylinder;
  LinkChain chain;
  WidthProfile profile = WidthProfile::Linear;
  CubicProfile cubic;
  /// Target node spacing in grid cells.
  double node_spacing_cells = 1.0;

  std::optional<GaitParams> gait;
  std::optional<std::filesystem::path> angle_file;

  std::filesystem::path output_directory = "output";
  int snapshot_stride = 0;
  SnapshotFormat snapshot_format = SnapshotFormat::Csv;

  /// Symmetry-breaking spin of a cylinder, surface speed and end time.
  double perturbation_speed = 0.0;
  double perturbation_until = 0.0;
  /// Stop once |dC_d| and |dC_l| per unit time fall below this (0 = run all steps).
  double steady_tolerance = 0.0;
  /// Optional coarse start-up: this many steps at startup_dt before fluid.dt.
  int startup_steps = 0;
  double startup_dt = 0.0;

  OptimizeMode optimize_mode = OptimizeMode::Shape;
  int optimize_max_iters = 5;
  int steps_per_period = 20;
  std::vector<double> lower_bounds;
  std::vector<double> upper_bounds;

  double check_eps = 1e-5;
  double check_tolerance = 1e-3;

  double target_spacing() const { return node_spacing_cells * std::max(grid.hx, grid.hy); }
  /// Physical time of a nondimensional time.
  double physical_time(double t) const { return physical_units ? t * fluid.reference_time() : t; }
};

/// Reads an INI-style file with sections [grid], [fluid],
/// [boundary_conditions], [body], [gait], [output], [benchmark],
/// [optimize], [check]. Unknown sections or keys, missing required
/// fields and giving both Re and physical properties are ConfigErrors.
SimConfigFile load_config(const std::filesystem::path& path);

/// Same, from text (used by tests); `origin` names the source in messages.
SimConfigFile parse_config(const std::string& text, const std::string& origin = "<config>",
                           const std::filesystem::path& base_directory = ".");

}  // namespace difsi
