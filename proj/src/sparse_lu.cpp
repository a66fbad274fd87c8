#include "difsi/sparse_lu.hpp"

#include <suitesparse/umfpack.h>

#include <algorithm>
#include <array>
#include <string>
#include <utility>
#include <vector>

namespace difsi {

namespace {

constexpr double kMinPivotRatio = 1e-14;

// Nested dissection pays for itself on large grids; AMD is faster to compute.
constexpr int kMetisThreshold = 20000;

struct PatternCache {
  std::vector<int> outer;
  std::vector<int> inner;
  std::shared_ptr<void> symbolic;

  bool matches(const SparseMatrix& m) const {
    if (!symbolic) return false;
    const auto n_outer = static_cast<std::size_t>(m.outerSize() + 1);
    const auto nnz = static_cast<std::size_t>(m.nonZeros());
    return outer.size() == n_outer && inner.size() == nnz &&
           std::equal(outer.begin(), outer.end(), m.outerIndexPtr()) &&
           std::equal(inner.begin(), inner.end(), m.innerIndexPtr());
  }
};

thread_local PatternCache last_pattern;

std::shared_ptr<void> analyze(const SparseMatrix& m) {
  if (last_pattern.matches(m)) return last_pattern.symbolic;
  const int n = static_cast<int>(m.rows());
  std::array<double, UMFPACK_CONTROL> control{};
  std::array<double, UMFPACK_INFO> info{};
  umfpack_di_defaults(control.data());
  if (n >= kMetisThreshold) control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  void* symbolic = nullptr;
  const int status = umfpack_di_symbolic(n, n, m.outerIndexPtr(), m.innerIndexPtr(), m.valuePtr(),
                                         &symbolic, control.data(), info.data());
  if (status != UMFPACK_OK) {
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
    throw SingularSystem("sparse LU symbolic analysis failed (status " + std::to_string(status) + ")");
  }
  std::shared_ptr<void> owned(symbolic, [](void* p) { umfpack_di_free_symbolic(&p); });
  last_pattern.outer.assign(m.outerIndexPtr(), m.outerIndexPtr() + m.outerSize() + 1);
  last_pattern.inner.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
  last_pattern.symbolic = owned;
  return owned;
}

}  // namespace

SparseLu::SparseLu(SparseMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw DimensionMismatch("SparseLu: matrix must be square");
  matrix_.makeCompressed();
  symbolic_ = analyze(matrix_);
  std::array<double, UMFPACK_CONTROL> control{};
  std::array<double, UMFPACK_INFO> info{};
  umfpack_di_defaults(control.data());
  const int status = umfpack_di_numeric(matrix_.outerIndexPtr(), matrix_.innerIndexPtr(),
                                        matrix_.valuePtr(), symbolic_.get(), &numeric_,
                                        control.data(), info.data());
  if (status != UMFPACK_OK) {
    release();
    throw SingularSystem("sparse LU factorization failed (status " + std::to_string(status) +
                         (status == UMFPACK_WARNING_singular_matrix ? ", singular matrix)" : ")"));
  }
  // Round-off hides exact zero pivots; a vanishing pivot ratio means the same thing.
  if (!(info[UMFPACK_RCOND] >= kMinPivotRatio)) {
    release();
    throw SingularSystem("sparse LU factorization is numerically singular (pivot ratio " +
                         std::to_string(info[UMFPACK_RCOND]) + ")");
  }
}

SparseLu::~SparseLu() { release(); }

SparseLu::SparseLu(SparseLu&& other) noexcept
    : matrix_(std::move(other.matrix_)),
      symbolic_(std::move(other.symbolic_)),
      numeric_(std::exchange(other.numeric_, nullptr)) {}

SparseLu& SparseLu::operator=(SparseLu&& other) noexcept {
  if (this != &other) {
    release();
    matrix_ = std::move(other.matrix_);
    symbolic_ = std::move(other.symbolic_);
    numeric_ = std::exchange(other.numeric_, nullptr);
  }
  return *this;
}

void SparseLu::release() {
  if (numeric_) umfpack_di_free_numeric(&numeric_);
  numeric_ = nullptr;
  symbolic_.reset();
}

Vector SparseLu::solve(const Vector& rhs) const {
  require_size(rhs.size(), matrix_.rows(), "SparseLu::solve");
  Vector x(rhs.size());
  std::array<double, UMFPACK_CONTROL> control{};
  std::array<double, UMFPACK_INFO> info{};
  umfpack_di_defaults(control.data());
  const int status = umfpack_di_solve(UMFPACK_A, matrix_.outerIndexPtr(), matrix_.innerIndexPtr(),
                                      matrix_.valuePtr(), x.data(), rhs.data(), numeric_,
                                      control.data(), info.data());
  if (status != UMFPACK_OK) {
    throw SingularSystem("sparse LU solve failed (status " + std::to_string(status) + ")");
  }
  return x;
}

Matrix SparseLu::solve(const Matrix& rhs) const {
  Matrix x(rhs.rows(), rhs.cols());
  for (Eigen::Index j = 0; j < rhs.cols(); ++j) x.col(j) = solve(Vector(rhs.col(j)));
  return x;
}

}  // namespace difsi
