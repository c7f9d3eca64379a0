#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ritzcg/augmentation.hpp"
#include "ritzcg/dct.hpp"
#include "ritzcg/image.hpp"
#include "ritzcg/tikhonov.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

/// Pyramid-level working set: image pair, gradients of the template and the
/// current displacement estimate.
struct FlowState {
  Image i1, i2;
  Image jx, jy;  // gradient of i1
  Image ux, uy;
  int level = 0;

  static FlowState from_pair(const Image& i1, const Image& i2, int level = 0);
  Index rows() const { return i1.rows(); }
  Index cols() const { return i1.cols(); }
};

/// Gauss-Newton image operator: (du_x, du_y) -> (J_x s, J_y s) with
/// s = J_x du_x + J_y du_y, pixelwise and matrix-free.
LinearMap flow_operator(const Image& jx, const Image& jy);

/// Regularizer: negative reflected-boundary Laplacian per flow component.
LinearMap flow_regularizer(Index rows, Index cols);

/// Preconditioner action: per-component DCT Laplacian inverse.
LinearMap flow_preconditioner(std::shared_ptr<const DctPlan> plan);

/// Jacobi action: inverse diagonal of A + lambda M.
LinearMap flow_jacobi_preconditioner(const Image& jx, const Image& jy, double lambda);

/// Two-column kernel basis of the regularizer, scaled so C0^T A C0 = I.
/// Throws for textureless gradients (fall back to raw constants then).
Matrix kernel_basis_c0(const Image& jx, const Image& jy);

struct FlowConfig {
  SolveConfig solve;
  int max_outer = 20;
  double outer_tol = 1e-3;  // on ||du||_M relative to ||u||_M
  int median_width = 3;
  bool jacobi_prec = false;     // diagonal preconditioning comparison path
  double recycle_fraction = 0.85;
  int levels = 0;  // 0 = auto: halve until min(N, M) / 2^L < 32

  FlowConfig() {
    solve.eps = 1e-5;
    solve.max_iter = 2000;
    solve.criteria = static_cast<unsigned>(StopCriterion::MinresStyle) |
                     StopCriterion::ResidualRatio;
    // Ritz-quality runs: without this the recycling quality gate rejects the
    // extracted vectors once Lanczos orthogonality decays.
    solve.reorthogonalize = true;
  }
};

/// One nonlinear level as a constant-operator problem: state is the stacked
/// flow, the right-hand side tracks the warped image residual, updates are
/// median-filtered.
class FlowProblem : public NonlinearProblem {
 public:
  FlowProblem(Image i1, Image i2, double lambda = 0.0, bool jacobi_prec = false,
              int median_width = 3);

  const LinearMap& a() const override { return a_; }
  const LinearMap& m() const override { return m_; }
  const LinearMap& m_inv() const override { return m_inv_; }
  std::pair<Vector, Vector> rhs(const Vector& state) const override;
  Vector update(const Vector& state, const Vector& delta) const override;
  /// Regularized image energy: 0.5 ||I1 - I2 o phi||^2 + lambda/2 u^T M u.
  double objective(const Vector& state) const override;

  const Image& jx() const { return jx_; }
  const Image& jy() const { return jy_; }
  Matrix kernel_basis() const { return kernel_basis_c0(jx_, jy_); }
  Index rows() const { return i1_.rows(); }
  Index cols() const { return i1_.cols(); }

 private:
  Image i1_, i2_, jx_, jy_;
  std::shared_ptr<const DctPlan> plan_;
  LinearMap a_, m_, m_inv_;
  double lambda_;
  int median_width_;
};

struct GnStepResult {
  Image dux, duy;
  SolveResult solve;
  std::optional<RitzSet> ritz;
};

/// One Gauss-Newton step: builds the regularized system at the current state,
/// solves it with the kernel-augmented preconditioned CG and median-filters
/// the increment.
GnStepResult gn_step(const FlowState& state, double lambda, const FlowConfig& cfg,
                     const AugmentationBasis* basis = nullptr, bool want_ritz = false);

struct FlowResult {
  Image ux, uy;
  std::vector<int> finest_inner_iterations;  // per GN solve on the full image
  std::optional<RitzSet> ritz;               // from the finest level
  int levels_used = 0;
  bool levels_clamped = false;
  std::vector<double> postprocess_lambdas;
  std::vector<std::pair<Image, Image>> postprocess_flows;
};

/// Coarse-to-fine estimation; box-filter pyramid, bilinear prolongation with
/// doubling, per-level Gauss-Newton loop with Ritz recycling. Weights in
/// `postprocess` are reconstructed on the finest level at marginal cost.
FlowResult pyramid_solve(const Image& i1, const Image& i2, double lambda,
                         const FlowConfig& cfg,
                         const std::vector<double>& postprocess = {});

/// Gradient energy of a flow field, the smoothness measure used to compare
/// regularization levels.
double gradient_energy(const Image& ux, const Image& uy);

}  // namespace ritzcg
