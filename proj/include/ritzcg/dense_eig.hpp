#pragma once

#include "ritzcg/types.hpp"

namespace ritzcg {

/// Eigendecomposition of a symmetric matrix: values descending, columns orthonormal.
struct DenseSpectrum {
  Vector values;
  Matrix vectors;

  Matrix reconstruct() const {
    return vectors * values.asDiagonal() * vectors.transpose();
  }
};

/**
 * Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi
 * rotations. Sweeps stop when the off-diagonal Frobenius norm drops below
 * 1e-12 * ||A||_F; after 50 sweeps without convergence a ConvergenceError
 * carrying the achieved off-diagonal norm is thrown. Input must be symmetric
 * to 1e-8 relative.
 */
DenseSpectrum dense_sym_eig(const Matrix& a);

/**
 * Generalized eigenpairs of (A, M) with M symmetric positive definite,
 * computed through the Cholesky factor M = L L^T and the symmetric
 * eigendecomposition of L^-1 A L^-T. Vectors are M-orthonormal.
 */
DenseSpectrum generalized_eig(const Matrix& a, const Matrix& m);

/**
 * Truncated spectral solve of a symmetric positive semi-definite system:
 * keeps only the eigendirections with sigma > eps_sigma * sigma_1.
 */
Vector tsvd_solve(const Matrix& a, const Vector& b, double eps_sigma);

/// Lower Cholesky factor; throws NotSpdError naming the failing pivot.
Matrix cholesky_lower(const Matrix& m);

/// Solves L L^T x = b given the lower factor L.
Vector cholesky_solve(const Matrix& lower, const Vector& b);

}  // namespace ritzcg
