#pragma once

#include <utility>
#include <vector>

#include "ritzcg/pcg.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

struct TridiagonalMatrix {
  Vector diag;     // mu_0 .. mu_{m-1}
  Vector offdiag;  // eta_0 .. eta_{m-2}, non-negative

  Index size() const { return diag.size(); }
  Matrix materialize() const;
};

/// Assembles the Lanczos tridiagonal from the CG coefficients:
/// mu_0 = 1/alpha_0, mu_j = 1/alpha_j + beta_{j-1}/alpha_{j-1},
/// eta_j = sqrt(beta_j)/alpha_j.
TridiagonalMatrix build_tridiagonal(const SolveTrace& trace);

struct TridiagEig {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns
};

TridiagEig tridiag_eig(const TridiagonalMatrix& t);

/**
 * Ritz elements of a solve: values of the generalized pencil (A, M) in
 * descending order, M-orthonormal vectors and the projections of the split
 * right-hand side onto them.
 *
 * For a solve on the shifted operator A + lambda_solve * M the stored theta
 * already have lambda_solve removed, so theta + lambda is the spectrum seen
 * at weight lambda.
 */
struct RitzSet {
  Vector theta;
  Matrix vectors;
  Vector r_a;  // v_j^T r_{A,0}
  Vector r_m;  // v_j^T r_{M,0}
  double lambda_solve = 0.0;
  int m = 0;
  int valid_count = 0;  // leading block passing the M-orthonormality check
  bool degraded = false;

  double theta_solve(Index j) const { return theta[j] + lambda_solve; }
  /// Projection of the solve residual: r_a + lambda_solve * r_m.
  Vector total_contribution() const { return r_a + lambda_solve * r_m; }
};

/// V = Zhat Xi with the sign-alternating normalization zhat_i = (-1)^i z_i / sqrt(gamma_i).
/// Requires the z store. Projections are filled from the trace split when present,
/// else r_a = V^T r0 and r_m = 0.
RitzSet ritz_vectors(const SolveTrace& trace, const TridiagEig& eig);

/// Convenience: tridiagonal, its eigendecomposition and the Ritz set in one go.
RitzSet extract_ritz(const SolveTrace& trace, double lambda_solve = 0.0);

/// A * V recovered from the stored q vectors at low cost:
/// A zhat_0 = q_0 / sqrt(gamma_0), A zhat_{j+1} = (-1)^{j+1} (q_{j+1} - beta_j q_j) / sqrt(gamma_{j+1}).
/// A here is the solve operator (A + lambda_solve * M for regularized runs).
Matrix ritz_apply_a(const SolveTrace& trace, const TridiagEig& eig);

/// Rescales V so that V'^T A V' = I against the solve operator.
/// Columns whose Ritz value is non-positive within round-off of zero are excluded.
std::pair<Matrix, Matrix> a_normalize(const RitzSet& ritz, const Matrix& av);

struct FilterStats {
  int dropped = 0;  // terms removed by the lambda -> 0 guard
};

/// Ritz-filtered solution x0 + sum_{j<=i} (r_a + lambda r_m)_j / (theta_j + lambda) v_j.
/// Terms with theta_j + lambda below 1e-14 * theta_1 are dropped and counted.
Vector filtered_solution(const RitzSet& ritz, const Vector& x0, double lambda, int i,
                         FilterStats* stats = nullptr);

struct LCurvePoint {
  double mnorm_sq = 0.0;     // ||x~_i - x0||_M^2
  double err_drop_sq = 0.0;  // regularized energy-error decrease from x0
  double err_offset = 0.0;   // ||x~_i - x||_A^2 - ||x0 - x||_A^2
};

/// Per-index L-curve data of the Ritz reconstruction at weight lambda.
std::vector<LCurvePoint> ritz_lcurve(const RitzSet& ritz, double lambda);

/// Corner of the Ritz L-curve: the index maximizing the slope variation
/// 1/theta_{j+1} - 1/theta_j. Returns the number of modes to keep (1-based),
/// ties broken toward smaller j.
int corner_index(const RitzSet& ritz);

struct PicardRow {
  int j = 0;  // 1-based, theta descending
  double theta = 0.0;
  double abs_r_a = 0.0;
  double lambda_abs_r_m = 0.0;
  double abs_r_total = 0.0;
};

/// Picard diagnostic rows at weight lambda; contribution columns are
/// median-smoothed with the given odd width (1 = identity).
std::vector<PicardRow> picard_table(const RitzSet& ritz, double lambda,
                                    int smooth_width = 5);

/// First index where the smoothed ratio |r_j| / theta_j turns increasing and
/// keeps increasing for two consecutive steps; m if it never does.
int picard_cutoff(const RitzSet& ritz, int smooth_width = 5);

/// Sliding median with edge replication, used for Picard smoothing.
Vector median_smooth(const Vector& values, int width);

/// Relative gaps between two Ritz value sets over their common leading block,
/// e.g. the spectra of consecutive iterations. Converged leading values drift
/// little while the trailing part of the spectrum is still moving.
Vector ritz_value_drift(const RitzSet& current, const RitzSet& previous);

}  // namespace ritzcg
