#pragma once

#include "ritzcg/image.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

/**
 * Cosine-basis plan for inverting the reflected-boundary discrete Laplacian
 * on a rectangle. The half-sample cosine modes cos(n pi (k + 1/2) / N) are
 * exact eigenvectors of the stencil with eigenvalues
 * 2(1 - cos(n pi / N)) + 2(1 - cos(m pi / M)); the zero mode is the constant.
 */
struct DctPlan {
  Index rows = 0;
  Index cols = 0;
  Matrix basis_rows;  // orthonormalized, rows x rows
  Matrix basis_cols;  // orthonormalized, cols x cols
  Matrix eigenvalues;  // rows x cols grid, (0,0) entry is zero

  Image forward(const Image& f) const { return basis_rows * f * basis_cols.transpose(); }
  Image inverse(const Image& coef) const {
    return basis_rows.transpose() * coef * basis_cols;
  }
};

DctPlan make_dct_plan(Index rows, Index cols);

/// Solves -Lap_h u = f - mean(f) with reflecting borders; u has zero mean.
Image dct_laplacian_inverse(const Image& f, const DctPlan& plan);

}  // namespace ritzcg
