#include "difsi/config_file.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace difsi {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"grid", {"nx", "ny", "extent"}},
      {"fluid", {"re", "rho", "mu", "u_ref", "l_ref", "dt", "n_steps", "newton_tol", "newton_max_iters"}},
      {"boundary_conditions", {"left", "right", "bottom", "top"}},
      {"body",
       {"type", "center_x", "center_y", "diameter", "node_spacing", "base_x", "base_y", "heading",
        "link_lengths", "joint_half_widths", "profile", "cubic", "min_half_width"}},
      {"gait", {"frequency", "amplitudes", "phases", "angle_file"}},
      {"output", {"directory", "snapshot_stride", "format"}},
      {"benchmark", {"perturbation_speed", "perturbation_until", "steady_tolerance", "startup_steps", "startup_dt"}},
      {"optimize", {"mode", "max_iters", "steps_per_period", "lower", "upper"}},
      {"check", {"eps", "tolerance"}},
  };
  return s;
}

// Reads typed fields and reports failures with their line.
class Reader {
 public:
  Reader(const std::string& text, std::string origin) : origin_(std::move(origin)) {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(origin_ + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    index_lines(text);
    for (const auto& [section, body] : tree_) {
      const auto it = schema().find(section);
      if (it == schema().end()) throw ConfigError(where(section, "") + "unknown section [" + section + "]");
      if (body.empty() && !body.data().empty()) {
        throw ConfigError(where(section, "") + "key '" + section + "' outside any section");
      }
      for (const auto& [key, value] : body) {
        if (!it->second.contains(key)) {
          throw ConfigError(where(section, key) + "unknown key '" + key + "' in section [" + section + "]");
        }
      }
    }
  }

  bool has(const std::string& section, const std::string& key) const {
    return static_cast<bool>(tree_.get_child_optional(pt::ptree::path_type(section + "/" + key, '/')));
  }

  std::string text(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError(origin_ + ": missing required field '" + section + "." + key + "'");
    return tree_.get<std::string>(pt::ptree::path_type(section + "/" + key, '/'));
  }
  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? text(section, key) : fallback;
  }

  double number(const std::string& section, const std::string& key) const {
    const auto values = numbers(section, key);
    if (values.size() != 1) throw ConfigError(where(section, key) + "'" + section + "." + key + "' must be one number");
    return values.front();
  }
  double number(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
  }

  int integer(const std::string& section, const std::string& key) const {
    const double v = number(section, key);
    if (v != std::floor(v)) throw ConfigError(where(section, key) + "'" + section + "." + key + "' must be an integer");
    return static_cast<int>(v);
  }
  int integer(const std::string& section, const std::string& key, int fallback) const {
    return has(section, key) ? integer(section, key) : fallback;
  }

  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    std::istringstream in(text(section, key));
    std::vector<double> out;
    std::string token;
    while (in >> token) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw ConfigError(where(section, key) + "'" + section + "." + key + "': '" + token + "' is not a number");
      }
    }
    return out;
  }

  std::string where(const std::string& section, const std::string& key) const {
    const auto it = lines_.find(section + "." + key);
    return origin_ + (it != lines_.end() ? ":" + std::to_string(it->second) : "") + ": ";
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    throw ConfigError(where(section, key) + what);
  }

 private:
  void index_lines(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == ';' || line[first] == '#') continue;
      if (line[first] == '[') {
        section = line.substr(first + 1, line.find(']') - first - 1);
        lines_.emplace(section + ".", n);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(first, eq - first);
      key.erase(key.find_last_not_of(" \t") + 1);
      lines_.emplace(section + "." + key, n);
    }
  }

  pt::ptree tree_;
  std::string origin_;
  std::map<std::string, int> lines_;
};

EdgeCondition parse_edge(const Reader& r, const std::string& key, double velocity_scale) {
  std::istringstream in(r.text("boundary_conditions", key));
  std::string kind;
  in >> kind;
  double ux = 0.0;
  double uy = 0.0;
  const bool has_velocity = static_cast<bool>(in >> ux >> uy);
  if (kind == "wall") return EdgeCondition::wall();
  if (kind == "outflow") return EdgeCondition::outflow();
  if (kind == "inflow" || kind == "far_field") {
    if (!has_velocity) r.fail("boundary_conditions", key, "'" + kind + "' needs two velocity components");
    const Vec2 v{ux / velocity_scale, uy / velocity_scale};
    return kind == "inflow" ? EdgeCondition::inflow(v) : EdgeCondition::far_field(v);
  }
  r.fail("boundary_conditions", key, "unknown edge kind '" + kind + "' (wall, outflow, inflow, far_field)");
}

}  // namespace

SimConfigFile parse_config(const std::string& text, const std::string& origin,
                           const std::filesystem::path& base_directory) {
  const Reader r(text, origin);
  SimConfigFile c;
  c.source = origin;

  // Units: either a Reynolds number (nondimensional input) or physical properties.
  const bool has_re = r.has("fluid", "re");
  const bool has_physical = r.has("fluid", "rho") || r.has("fluid", "mu") || r.has("fluid", "u_ref") ||
                            r.has("fluid", "l_ref");
  if (has_re && has_physical) {
    r.fail("fluid", "re", "give either 'fluid.re' or physical properties (rho, mu, u_ref, l_ref), not both");
  }
  if (!has_re && !has_physical) {
    throw ConfigError(origin + ": missing required field 'fluid.re' (or rho, mu, u_ref, l_ref)");
  }
  double length = 1.0;
  double time = 1.0;
  double velocity = 1.0;
  if (has_re) {
    c.fluid.reynolds = r.number("fluid", "re");
    if (!(c.fluid.reynolds > 0.0)) r.fail("fluid", "re", "'fluid.re' must be positive");
  } else {
    try {
      c.fluid = FluidConfig::from_physical(r.number("fluid", "rho"), r.number("fluid", "mu"),
                                           r.number("fluid", "u_ref"), r.number("fluid", "l_ref"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(origin + ": " + e.what());
    }
    c.physical_units = true;
    length = c.fluid.reference_length;
    velocity = c.fluid.reference_velocity;
    time = length / velocity;
  }
  c.fluid.dt = r.number("fluid", "dt") / time;
  c.fluid.newton_tol = r.number("fluid", "newton_tol", c.fluid.newton_tol);
  c.fluid.newton_max_iters = r.integer("fluid", "newton_max_iters", c.fluid.newton_max_iters);
  c.n_steps = r.integer("fluid", "n_steps", 0);
  if (c.n_steps < 0) r.fail("fluid", "n_steps", "'fluid.n_steps' must be nonnegative");
  try {
    c.fluid.validate();
  } catch (const Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  const int nx = r.integer("grid", "nx");
  const int ny = r.integer("grid", "ny");
  // extent = x_min x_max y_min y_max
  const auto extent = r.numbers("grid", "extent");
  if (extent.size() != 4 || !(extent[1] > extent[0]) || !(extent[3] > extent[2])) {
    r.fail("grid", "extent", "'grid.extent' must be four numbers x_min x_max y_min y_max with x_max > x_min, y_max > y_min");
  }
  const double width = (extent[1] - extent[0]) / length;
  const double height = (extent[3] - extent[2]) / length;
  const Vec2 origin_xy{extent[0] / length, extent[2] / length};
  try {
    c.grid = GridSpec::uniform(nx, ny, width, height, origin_xy);
  } catch (const Error& e) {
    throw ConfigError(r.where("grid", "nx") + e.what());
  }

  for (const auto& [edge, key] : {std::pair{Edge::Left, "left"}, std::pair{Edge::Right, "right"},
                                  std::pair{Edge::Bottom, "bottom"}, std::pair{Edge::Top, "top"}}) {
    if (r.has("boundary_conditions", key)) c.boundary[edge] = parse_edge(r, key, velocity);
  }
  try {
    c.boundary.validate();
  } catch (const Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  const std::string type = r.text("body", "type", "none");
  c.node_spacing_cells = r.number("body", "node_spacing", 1.0);
  if (!(c.node_spacing_cells > 0.0)) r.fail("body", "node_spacing", "'body.node_spacing' must be positive");
  if (type == "none") {
    c.body = BodyKind::None;
  } else if (type == "cylinder") {
    c.body = BodyKind::Cylinder;
    c.cylinder.center = {r.number("body", "center_x") / length, r.number("body", "center_y") / length};
    c.cylinder.diameter = r.number("body", "diameter") / length;
    if (!(c.cylinder.diameter > 0.0)) r.fail("body", "diameter", "'body.diameter' must be positive");
  } else if (type == "tail") {
    c.body = BodyKind::Tail;
    c.chain.base = {r.number("body", "base_x") / length, r.number("body", "base_y") / length};
    c.chain.heading = r.number("body", "heading", 0.0);
    for (double l : r.numbers("body", "link_lengths")) c.chain.link_lengths.push_back(l / length);
    const std::string profile = r.text("body", "profile", "linear");
    if (profile == "linear") {
      c.profile = WidthProfile::Linear;
      for (double w : r.numbers("body", "joint_half_widths")) c.chain.joint_half_widths.push_back(w / length);
      try {
        c.chain.validate();
      } catch (const Error& e) {
        throw ConfigError(r.where("body", "link_lengths") + e.what());
      }
    } else if (profile == "cubic") {
      c.profile = WidthProfile::Cubic;
      const auto coeffs = r.numbers("body", "cubic");
      if (coeffs.size() != 4) r.fail("body", "cubic", "'body.cubic' needs four coefficients");
      // w(l) is a length; l is already normalized.
      for (int k = 0; k < 4; ++k) c.cubic.c[static_cast<std::size_t>(k)] = coeffs[static_cast<std::size_t>(k)] / length;
      c.cubic.w_min = r.number("body", "min_half_width", 0.0) / length;
      try {
        c.cubic.validate();
      } catch (const Error& e) {
        throw ConfigError(r.where("body", "cubic") + e.what());
      }
    } else {
      r.fail("body", "profile", "unknown profile '" + profile + "' (linear, cubic)");
    }
    if (c.chain.links() < 2) r.fail("body", "link_lengths", "tail needs at least two links");
  } else {
    r.fail("body", "type", "unknown body type '" + type + "' (none, cylinder, tail)");
  }

  if (r.has("gait", "angle_file") && r.has("gait", "frequency")) {
    r.fail("gait", "angle_file", "give either 'gait.angle_file' or a sinusoidal gait, not both");
  }
  if (r.has("gait", "angle_file")) {
    std::filesystem::path p = r.text("gait", "angle_file");
    c.angle_file = p.is_absolute() ? p : base_directory / p;
  } else if (r.has("gait", "frequency")) {
    GaitParams g;
    g.frequency = r.number("gait", "frequency") * time;
    g.amplitudes = r.numbers("gait", "amplitudes");
    g.phases = r.has("gait", "phases") ? r.numbers("gait", "phases") : std::vector<double>(g.amplitudes.size(), 0.0);
    try {
      g.validate();
    } catch (const Error& e) {
      throw ConfigError(r.where("gait", "frequency") + e.what());
    }
    c.gait = g;
  }
  if (c.body == BodyKind::Tail && !c.gait && !c.angle_file) {
    throw ConfigError(origin + ": missing required field 'gait.frequency' or 'gait.angle_file' for a tail body");
  }

  c.output_directory = r.text("output", "directory", "output");
  c.snapshot_stride = r.integer("output", "snapshot_stride", 0);
  const std::string format = r.text("output", "format", "csv");
  if (format == "csv") {
    c.snapshot_format = SnapshotFormat::Csv;
  } else if (format == "binary") {
    c.snapshot_format = SnapshotFormat::Binary;
  } else {
    r.fail("output", "format", "unknown snapshot format '" + format + "' (csv, binary)");
  }

  c.perturbation_speed = r.number("benchmark", "perturbation_speed", 0.0) / velocity;
  c.perturbation_until = r.number("benchmark", "perturbation_until", 0.0) / time;
  c.steady_tolerance = r.number("benchmark", "steady_tolerance", 0.0);
  c.startup_steps = r.integer("benchmark", "startup_steps", 0);
  c.startup_dt = r.number("benchmark", "startup_dt", 0.0) / time;
  if (c.startup_steps < 0 || (c.startup_steps > 0 && !(c.startup_dt > 0.0))) {
    r.fail("benchmark", "startup_steps", "start-up needs startup_steps >= 0 and a positive startup_dt");
  }

  const std::string mode = r.text("optimize", "mode", "shape");
  if (mode == "shape") {
    c.optimize_mode = OptimizeMode::Shape;
  } else if (mode == "shape_and_gait") {
    c.optimize_mode = OptimizeMode::ShapeAndGait;
  } else {
    r.fail("optimize", "mode", "unknown optimization mode '" + mode + "' (shape, shape_and_gait)");
  }
  c.optimize_max_iters = r.integer("optimize", "max_iters", 5);
  c.steps_per_period = r.integer("optimize", "steps_per_period", 20);
  if (r.has("optimize", "lower")) c.lower_bounds = r.numbers("optimize", "lower");
  if (r.has("optimize", "upper")) c.upper_bounds = r.numbers("optimize", "upper");

  c.check_eps = r.number("check", "eps", 1e-5);
  c.check_tolerance = r.number("check", "tolerance", 1e-3);
  return c;
}

SimConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string(), path.parent_path());
}

}  // namespace difsi
