#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "ritzcg/augmentation.hpp"
#include "ritzcg/linear_map.hpp"
#include "ritzcg/pcg.hpp"
#include "ritzcg/ritz.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

/**
 * Regularized system (A + lambda M) x = b_A + lambda b_M with separate
 * right-hand-side bookkeeping. The preconditioner action m_inv must realize
 * (a pseudo-)inverse of M, exact or structured (e.g. a DCT solve).
 */
struct TikhonovSystem {
  LinearMap a;
  LinearMap m;
  LinearMap m_inv;
  Vector b_a;
  Vector b_m;
  double lambda = 0.0;

  void validate() const {
    require(lambda >= 0.0, "TikhonovSystem: lambda must be non-negative");
    require_same_dim(a.dim(), m.dim(), "TikhonovSystem: A vs M");
    require_same_dim(a.dim(), m_inv.dim(), "TikhonovSystem: A vs M^-1");
    require_same_dim(a.dim(), b_a.size(), "TikhonovSystem: A vs b_A");
    require_same_dim(a.dim(), b_m.size(), "TikhonovSystem: A vs b_M");
  }

  Vector rhs() const { return b_a + lambda * b_m; }
  LinearMap shifted() const { return shifted_map(a, m, lambda); }
};

struct RegularizedSolve {
  SolveResult result;
  std::optional<RitzSet> ritz;
};

/**
 * Solves the regularized system with the regularizer doubling as the
 * preconditioner, optionally augmented. When want_ritz is set the solve
 * retains its basis vectors, splits the initial residual into
 * r_A0 = b_A - A x0 and r_M0 = b_M - M x0 and extracts the Ritz set.
 */
RegularizedSolve solve_regularized(const TikhonovSystem& system, const SolveConfig& cfg,
                                   const AugmentationBasis* basis = nullptr,
                                   bool want_ritz = false,
                                   const IterationObserver& observer = nullptr);

struct SweepPoint {
  double lambda = 0.0;
  double mnorm_sq = 0.0;   // ||x~ - x0||_M^2
  double err_offset = 0.0; // ||x~ - x||_A^2 - ||x0 - x||_A^2
  Vector x;
};

/// Ritz reconstruction over a grid of regularization weights, full index i = m.
/// Valid for the (A, M, b_A, b_M) the Ritz set was extracted from; the grid may
/// include lambda = 0 even when A alone is singular.
std::vector<SweepPoint> lambda_sweep(const RitzSet& ritz, const Vector& x0,
                                     const std::vector<double>& grid);

/// Nonlinear problem solved by repeated linear solves with a constant
/// left-hand side and a state-dependent right-hand side.
class NonlinearProblem {
 public:
  virtual ~NonlinearProblem() = default;
  virtual const LinearMap& a() const = 0;
  virtual const LinearMap& m() const = 0;
  virtual const LinearMap& m_inv() const = 0;
  /// Right-hand sides (b_A, b_M) at the given state.
  virtual std::pair<Vector, Vector> rhs(const Vector& state) const = 0;
  /// State update; defaults to state + delta.
  virtual Vector update(const Vector& state, const Vector& delta) const {
    return state + delta;
  }
  /// Merit value at a state, or NaN when the problem does not define one.
  /// When defined, the outer driver rejects steps that increase it and stops.
  virtual double objective(const Vector& state) const {
    (void)state;
    return std::numeric_limits<double>::quiet_NaN();
  }
};

/// Solve weight lambda0 plus the postprocess weights; lambda0 should be the
/// largest of the family (downward extrapolation is the tested regime).
struct LambdaFamily {
  double lambda0 = 0.0;
  std::vector<double> postprocess;

  std::vector<double> all() const {
    std::vector<double> lambdas{lambda0};
    lambdas.insert(lambdas.end(), postprocess.begin(), postprocess.end());
    return lambdas;
  }
};

struct MultiLambdaConfig {
  int outer_iterations = 1;
  bool truncate_at_corner = true;  // false: full i = m reconstruction
  double recycle_fraction = 0.85;  // 0 disables Ritz recycling across outers
  double outer_tol = 0.0;  // stop when ||delta_0||_M <= tol * ||state_0||_M (0 = off)
};

struct MultiLambdaResult {
  std::vector<double> lambdas;  // lambda0 first
  std::vector<Vector> states;
  std::vector<int> inner_iterations;  // per outer iteration
  int completed_outer = 0;
  bool aborted = false;
  std::optional<RitzSet> last_ritz;  // from the last lambda0 solve
};

/**
 * Multi-weight outer driver: per outer iteration only the lambda0 system is
 * solved (augmented, with Ritz extraction); the remaining weights are updated
 * through the Ritz reconstruction of their own right-hand sides.
 */
MultiLambdaResult multi_lambda_outer(const NonlinearProblem& problem,
                                     const LambdaFamily& family,
                                     const Vector& initial_state,
                                     const SolveConfig& cfg,
                                     const MultiLambdaConfig& outer_cfg,
                                     const AugmentationBasis* basis0 = nullptr);

/// Dense-backed preconditioner action from the Cholesky factor of M.
LinearMap make_dense_inverse_map(const Matrix& m);

}  // namespace ritzcg
