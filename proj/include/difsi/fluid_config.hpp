#pragma once

#include "difsi/types.hpp"

namespace difsi {

/// Nondimensional flow parameters plus the reference scales used to convert
/// results back to physical units.
struct FluidConfig {
  double reynolds = 100.0;
  double dt = 0.01;
  /// External acceleration per velocity unknown; empty means zero.
  Vector external_acceleration;
  double newton_tol = 1e-8;
  int newton_max_iters = 10;
  /// Physical density (kg/m^3), only used to redimensionalize forces.
  double density = 1.0;
  double reference_velocity = 1.0;
  double reference_length = 1.0;
  /// Drops N(u) from the momentum equation (Stokes limit).
  bool convection = true;

  /// Re = rho u_ref l_ref / mu.
  static FluidConfig from_physical(double density, double viscosity, double reference_velocity,
                                   double reference_length);

  double reference_time() const { return reference_length / reference_velocity; }
  void validate() const;
};

}  // namespace difsi
