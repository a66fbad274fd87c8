#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace difsi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

// Error hierarchy. Everything the library throws derives from Error so the
// CLI can map families onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class InvalidBoundaryConditions : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::ptrdiff_t step)
      : Error(what), step_(step) {}
  explicit NonConvergence(const std::string& what) : Error(what) {}
  std::ptrdiff_t step() const { return step_; }

 private:
  std::ptrdiff_t step_ = -1;
};

class NodeOutsideDomain : public Error {
 public:
  using Error::Error;
};

class BodyTooLargeForDomain : public Error {
 public:
  using Error::Error;
};

class StaleFactorization : public Error {
 public:
  using Error::Error;
};

class NoOscillationDetected : public Error {
 public:
  using Error::Error;
};

class ZeroReferenceVelocity : public Error {
 public:
  using Error::Error;
};

class LineSearchFailure : public Error {
 public:
  using Error::Error;
};

inline void require_size(std::ptrdiff_t got, std::ptrdiff_t want, const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(want) +
                            ", got " + std::to_string(got));
  }
}

}  // namespace difsi
