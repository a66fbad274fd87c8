#pragma once

#include <memory>

#include "difsi/types.hpp"

namespace difsi {

/// Owning sparse LU factorization (UMFPACK). Keeps its own copy of the
/// matrix so solves can apply iterative refinement. Solves are const and
/// safe to call concurrently. The symbolic analysis of the last pattern
/// factorized on the calling thread is reused when the pattern repeats.
class SparseLu {
 public:
  /// Factorizes `matrix`. Throws SingularSystem when UMFPACK reports a
  /// singular or numerically failed factorization.
  explicit SparseLu(SparseMatrix matrix);
  ~SparseLu();

  SparseLu(const SparseLu&) = delete;
  SparseLu& operator=(const SparseLu&) = delete;
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;

  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;

  const SparseMatrix& matrix() const { return matrix_; }
  int rows() const { return static_cast<int>(matrix_.rows()); }

 private:
  void release();

  SparseMatrix matrix_;
  std::shared_ptr<void> symbolic_;
  void* numeric_ = nullptr;
};

}  // namespace difsi
