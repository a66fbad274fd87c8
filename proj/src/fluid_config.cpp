#include "difsi/fluid_config.hpp"

#include <cmath>

namespace difsi {

FluidConfig FluidConfig::from_physical(double density, double viscosity, double reference_velocity,
                                       double reference_length) {
  if (!(density > 0.0) || !(viscosity > 0.0) || !(reference_length > 0.0)) {
    throw Error("density, viscosity and reference length must be positive");
  }
  if (!(std::abs(reference_velocity) > 0.0)) {
    throw ZeroReferenceVelocity("reference velocity must be nonzero");
  }
  FluidConfig cfg;
  cfg.density = density;
  cfg.reference_velocity = reference_velocity;
  cfg.reference_length = reference_length;
  cfg.reynolds = density * reference_velocity * reference_length / viscosity;
  return cfg;
}

void FluidConfig::validate() const {
  if (!(reynolds > 0.0) || !std::isfinite(reynolds)) throw Error("Reynolds number must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("time step must be positive");
  if (!(newton_tol > 0.0)) throw Error("newton_tol must be positive");
  if (newton_max_iters < 1) throw Error("newton_max_iters must be at least 1");
  if (!(density > 0.0)) throw Error("density must be positive");
}

}  // namespace difsi
