#pragma once

// Data-parallel inner loops. Each kernel exists twice with identical
// signatures: `serial` is the reference used by the tests, `omp` splits the
// outer loop across OpenMP threads. Every output element is computed by one
// iteration only, so both produce bitwise-identical results.

#include <array>
#include <span>
#include <vector>

#include "difsi/grid.hpp"

namespace difsi::kernels {

struct FieldContext {
  const GridSpec& grid;
  const VelocityLayout& layout;
  const BoundaryData& boundary;
};

/// Fixed-capacity sparse rows; row r owns entries [r*kRowCapacity, r*kRowCapacity + count[r]).
struct SparseRows {
  static constexpr int kRowCapacity = 16;
  int rows = 0;
  std::vector<int> count;
  std::vector<int> cols;
  std::vector<double> vals;

  void resize(int n) {
    rows = n;
    count.assign(static_cast<std::size_t>(n), 0);
    cols.assign(static_cast<std::size_t>(n) * kRowCapacity, -1);
    vals.assign(static_cast<std::size_t>(n) * kRowCapacity, 0.0);
  }
  SparseMatrix to_matrix(int n_cols) const;
};

/// Lagrangian points at which the interpolation rows are evaluated.
struct NodeSet {
  std::span<const Vec2> positions;
};

namespace serial {
void convect(const FieldContext& ctx, std::span<const double> u, std::span<double> out);
void convect_jacobian(const FieldContext& ctx, std::span<const double> u, SparseRows& rows);
void interpolation_rows(const FieldContext& ctx, NodeSet nodes, SparseRows& rows);
void corner_vorticity(const FieldContext& ctx, std::span<const double> u, std::span<double> out);
}  // namespace serial

namespace omp {
void convect(const FieldContext& ctx, std::span<const double> u, std::span<double> out);
void convect_jacobian(const FieldContext& ctx, std::span<const double> u, SparseRows& rows);
void interpolation_rows(const FieldContext& ctx, NodeSet nodes, SparseRows& rows);
void corner_vorticity(const FieldContext& ctx, std::span<const double> u, std::span<double> out);
}  // namespace omp

int max_threads();

}  // namespace difsi::kernels
