#include "ritzcg/dct.hpp"

#include <cmath>

namespace ritzcg {

namespace {

constexpr double kPi = 3.14159265358979323846;

Matrix cosine_basis(Index n) {
  Matrix basis(n, n);
  for (Index k = 0; k < n; ++k) {
    double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (Index l = 0; l < n; ++l)
      basis(k, l) = scale * std::cos(k * kPi * (l + 0.5) / n);
  }
  return basis;
}

}  // namespace

DctPlan make_dct_plan(Index rows, Index cols) {
  require(rows >= 2 && cols >= 2, "make_dct_plan: need at least 2x2");
  DctPlan plan;
  plan.rows = rows;
  plan.cols = cols;
  plan.basis_rows = cosine_basis(rows);
  plan.basis_cols = cosine_basis(cols);
  plan.eigenvalues.resize(rows, cols);
  for (Index m = 0; m < rows; ++m)
    for (Index n = 0; n < cols; ++n)
      plan.eigenvalues(m, n) =
          2.0 * (1.0 - std::cos(m * kPi / rows)) + 2.0 * (1.0 - std::cos(n * kPi / cols));
  return plan;
}

Image dct_laplacian_inverse(const Image& f, const DctPlan& plan) {
  require_same_dim(plan.rows, f.rows(), "dct_laplacian_inverse");
  require_same_dim(plan.cols, f.cols(), "dct_laplacian_inverse");
  Image coef = plan.forward(f);
  coef(0, 0) = 0.0;  // zero-mean pseudo-inverse
  for (Index m = 0; m < plan.rows; ++m)
    for (Index n = 0; n < plan.cols; ++n)
      if (m != 0 || n != 0) coef(m, n) /= plan.eigenvalues(m, n);
  return plan.inverse(coef);
}

}  // namespace ritzcg
