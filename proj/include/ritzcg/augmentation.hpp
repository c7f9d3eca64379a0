#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ritzcg/linear_map.hpp"
#include "ritzcg/pcg.hpp"
#include "ritzcg/ritz.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

enum class BasisLabel : std::uint8_t { Kernel = 0, Ritz = 1 };

/**
 * Augmentation space for the projected conjugate gradient: a full-column-rank
 * matrix C with its precomputed image A C and the Cholesky factor of C^T A C.
 * Immutable once built; recycling produces a new basis.
 */
class AugmentationBasis : public Projector {
 public:
  AugmentationBasis() = default;

  /// Builds from columns; throws listing dependent columns if C^T A C is singular.
  static AugmentationBasis build(const LinearMap& a, const Matrix& c,
                                 std::vector<BasisLabel> labels);

  /// Like build, but drops dependent columns instead of throwing.
  static AugmentationBasis build_dropping(const LinearMap& a, const Matrix& c,
                                          std::vector<BasisLabel> labels,
                                          std::vector<int>* dropped = nullptr);

  /// Builds from columns with their images A C already known (e.g. through the
  /// q-vector recurrence), so no operator application is needed. Dependent
  /// columns are dropped.
  static AugmentationBasis build_with_ac(const Matrix& c, const Matrix& ac,
                                         std::vector<BasisLabel> labels,
                                         std::vector<int>* dropped = nullptr);

  bool empty() const override { return count() == 0; }
  Index dim() const { return c_.rows(); }
  int count() const { return static_cast<int>(c_.cols()); }
  const Matrix& c() const { return c_; }
  const Matrix& ac() const { return ac_; }
  const std::vector<BasisLabel>& labels() const { return labels_; }

  /// x0 = x00 + C G^-1 C^T r00 and the matching residual with C^T r0 = 0.
  std::pair<Vector, Vector> init(const Vector& x00, const Vector& b,
                                 const LinearMap& a) const;

  /// Solves C^T A C y = rhs.
  Vector solve_gram(const Vector& rhs) const;

  Vector apply(const Vector& v) const override;            // P = I - C G^-1 (AC)^T
  Vector apply_transpose(const Vector& v) const override;  // P^T = I - AC G^-1 C^T

 private:
  Matrix c_;
  Matrix ac_;
  Matrix gram_lower_;
  std::vector<BasisLabel> labels_;
};

/// Spec surface: x0 = x00 + C (C^T A C)^-1 C^T r00 with C^T r0 = 0.
inline std::pair<Vector, Vector> augmented_init(const Vector& x00, const Vector& b,
                                                const AugmentationBasis& basis,
                                                const LinearMap& a) {
  return basis.init(x00, b, a);
}

inline Vector project(const AugmentationBasis& basis, const Vector& v) {
  return basis.apply(v);
}

struct KernelCheckReport {
  std::vector<int> violating_columns;
  std::vector<double> column_residuals;  // ||M c_j|| for every column
  double operator_norm_estimate = 0.0;
  bool pass() const { return violating_columns.empty(); }
};

/// Verifies M C0 ~ 0 columnwise against a power-iteration estimate of ||M||.
KernelCheckReport kernel_basis_check(const Matrix& c0, const LinearMap& m,
                                     double tol = 1e-8);

/**
 * Appends the leading `keep` A-normalized Ritz vectors (with their precomputed
 * A V columns) to the basis and refactorizes the Gram matrix. Degraded Ritz
 * sets are truncated to their leading trustworthy block; rank-deficient
 * columns are dropped with a count reported through `dropped`.
 */
AugmentationBasis recycle(const AugmentationBasis& basis, const LinearMap& a,
                          const RitzSet& ritz, const Matrix& av, int keep,
                          std::vector<int>* dropped = nullptr);

/// Default recycled-subspace size: ceil(0.85 m).
int default_keep(int m);

/// Flat binary persistence of the columns and labels so bases can cross runs.
void save_basis(const std::string& path, const AugmentationBasis& basis);
AugmentationBasis load_basis(const std::string& path, const LinearMap& a);

}  // namespace ritzcg
