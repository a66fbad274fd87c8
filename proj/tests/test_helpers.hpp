#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "difsi/grid.hpp"

namespace testing {

using namespace difsi;

inline Vector random_vector(Eigen::Index n, unsigned seed, double scale = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

// Taylor-Green vortex on [0, 2pi]^2 decaying at rate 2 / Re.
inline Vec2 taylor_green(Vec2 p, double t, double re) {
  const double decay = std::exp(-2.0 * t / re);
  return {std::sin(p.x) * std::cos(p.y) * decay, -std::cos(p.x) * std::sin(p.y) * decay};
}

inline DomainBoundaryConditions taylor_green_boundary(double re) {
  return DomainBoundaryConditions::all(
      EdgeCondition::prescribed([re](Vec2 p, double t) { return taylor_green(p, t, re); }));
}

// Edges on the vortex symmetry lines: tangential velocity is odd about each
// edge, so the reflected ghost values are exact there.
inline GridSpec taylor_green_grid(int n) {
  return GridSpec::uniform(n, n, 2.0 * M_PI, 2.0 * M_PI, {0.5 * M_PI, 0.5 * M_PI});
}

inline double dense_max_abs(const SparseMatrix& m) {
  double v = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  }
  return v;
}

}  // namespace testing
