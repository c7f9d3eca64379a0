#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ritzcg {

using Scalar = double;
using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& where, Index got, Index expected)
      : Error(where + ": dimension mismatch, got " + std::to_string(got) +
              ", expected " + std::to_string(expected)) {}
};

/// A matrix expected to be symmetric is not (beyond tolerance).
class NotSymmetricError : public Error {
 public:
  explicit NotSymmetricError(double defect)
      : Error("matrix is not symmetric, relative defect " + std::to_string(defect)),
        defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

/// Cholesky factorization hit a non-positive pivot.
class NotSpdError : public Error {
 public:
  explicit NotSpdError(Index pivot)
      : Error("matrix is not positive definite, pivot " + std::to_string(pivot) +
              " failed"),
        pivot_(pivot) {}
  Index pivot() const { return pivot_; }

 private:
  Index pivot_;
};

/// Iterative scheme did not reach its target accuracy.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (achieved " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

inline void require(bool cond, const std::string& message) {
  if (!cond) throw Error(message);
}

inline void require_same_dim(Index a, Index b, const std::string& where) {
  if (a != b) throw DimensionError(where, b, a);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace ritzcg
