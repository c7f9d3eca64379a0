#include "ritzcg/opticalflow.hpp"

#include <cmath>

namespace ritzcg {

FlowState FlowState::from_pair(const Image& i1, const Image& i2, int level) {
  require_same_dim(i1.rows(), i2.rows(), "FlowState");
  require_same_dim(i1.cols(), i2.cols(), "FlowState");
  FlowState state;
  state.i1 = i1;
  state.i2 = i2;
  auto [jx, jy] = gradient(i1);
  state.jx = jx;
  state.jy = jy;
  state.ux = Image::Zero(i1.rows(), i1.cols());
  state.uy = Image::Zero(i1.rows(), i1.cols());
  state.level = level;
  return state;
}

LinearMap flow_operator(const Image& jx, const Image& jy) {
  auto held_x = std::make_shared<Image>(jx);
  auto held_y = std::make_shared<Image>(jy);
  const Index rows = jx.rows();
  const Index cols = jx.cols();
  const Index n = rows * cols;
  return LinearMap(2 * n, MapKind::MatrixFree, [held_x, held_y, rows, cols, n](const Vector& v) -> Vector {
    auto [vx, vy] = unstack_fields(v, rows, cols);
    Image s = held_x->cwiseProduct(vx) + held_y->cwiseProduct(vy);
    return stack_fields(Image(held_x->cwiseProduct(s)), Image(held_y->cwiseProduct(s)));
  });
}

LinearMap flow_regularizer(Index rows, Index cols) {
  const Index n = rows * cols;
  return LinearMap(2 * n, MapKind::MatrixFree, [rows, cols](const Vector& v) -> Vector {
    auto [vx, vy] = unstack_fields(v, rows, cols);
    return stack_fields(neg_laplacian(vx), neg_laplacian(vy));
  });
}

LinearMap flow_preconditioner(std::shared_ptr<const DctPlan> plan) {
  const Index rows = plan->rows;
  const Index cols = plan->cols;
  const Index n = rows * cols;
  return LinearMap(2 * n, MapKind::MatrixFree, [plan, rows, cols](const Vector& v) -> Vector {
    auto [vx, vy] = unstack_fields(v, rows, cols);
    return stack_fields(dct_laplacian_inverse(vx, *plan),
                        dct_laplacian_inverse(vy, *plan));
  });
}

LinearMap flow_jacobi_preconditioner(const Image& jx, const Image& jy, double lambda) {
  const Index rows = jx.rows();
  const Index cols = jx.cols();
  Image lap_diag(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    for (Index x = 0; x < cols; ++x) {
      double diag = 4.0;
      if (y == 0 || y == rows - 1) diag -= 1.0;
      if (x == 0 || x == cols - 1) diag -= 1.0;
      lap_diag(y, x) = diag;
    }
  }
  Image dx = jx.cwiseProduct(jx) + lambda * lap_diag;
  Image dy = jy.cwiseProduct(jy) + lambda * lap_diag;
  Vector inv_diag = stack_fields(dx, dy).cwiseMax(1e-300).cwiseInverse();
  return diagonal_map(inv_diag);
}

Matrix kernel_basis_c0(const Image& jx, const Image& jy) {
  const Index n = jx.size();
  double s_xx = jx.squaredNorm();
  double s_xy = jx.cwiseProduct(jy).sum();
  double s_yy = jy.squaredNorm();
  require(s_xx > 0.0,
          "kernel_basis_c0: textureless image (s_xx = 0), fall back to the raw "
          "constants basis");
  double schur = s_yy - s_xy * s_xy / s_xx;
  require(schur > 0.0,
          "kernel_basis_c0: degenerate gradients (rank-one structure), fall back "
          "to the raw constants basis");
  double s_b = 1.0 / std::sqrt(schur);

  Matrix c0 = Matrix::Zero(2 * n, 2);
  c0.col(0).head(n).setConstant(1.0 / std::sqrt(s_xx));
  c0.col(1).head(n).setConstant(-s_xy * s_b / s_xx);
  c0.col(1).tail(n).setConstant(s_b);
  return c0;
}

FlowProblem::FlowProblem(Image i1, Image i2, double lambda, bool jacobi_prec,
                         int median_width)
    : i1_(std::move(i1)), i2_(std::move(i2)), lambda_(lambda),
      median_width_(median_width) {
  auto [jx, jy] = gradient(i1_);
  jx_ = jx;
  jy_ = jy;
  a_ = flow_operator(jx_, jy_);
  m_ = flow_regularizer(i1_.rows(), i1_.cols());
  if (jacobi_prec) {
    m_inv_ = flow_jacobi_preconditioner(jx_, jy_, lambda);
  } else {
    plan_ = std::make_shared<const DctPlan>(make_dct_plan(i1_.rows(), i1_.cols()));
    m_inv_ = flow_preconditioner(plan_);
  }
}

double FlowProblem::objective(const Vector& state) const {
  auto [ux, uy] = unstack_fields(state, i1_.rows(), i1_.cols());
  Image residual = i1_ - warp(i2_, ux, uy);
  double image_energy = 0.5 * residual.squaredNorm();
  double smooth_energy = 0.5 * lambda_ * state.dot(m_.apply(state));
  return image_energy + smooth_energy;
}

std::pair<Vector, Vector> FlowProblem::rhs(const Vector& state) const {
  auto [ux, uy] = unstack_fields(state, i1_.rows(), i1_.cols());
  Image residual = i1_ - warp(i2_, ux, uy);
  Vector b_a = stack_fields(Image(residual.cwiseProduct(jx_)),
                            Image(residual.cwiseProduct(jy_)));
  // b_M = vec(Lap u) = -M u under the PSD sign convention.
  Vector b_m = -stack_fields(neg_laplacian(ux), neg_laplacian(uy));
  return {b_a, b_m};
}

Vector FlowProblem::update(const Vector& state, const Vector& delta) const {
  auto [dux, duy] = unstack_fields(delta, i1_.rows(), i1_.cols());
  Vector filtered = stack_fields(median_filter(dux, median_width_),
                                 median_filter(duy, median_width_));
  return state + filtered;
}

GnStepResult gn_step(const FlowState& state, double lambda, const FlowConfig& cfg,
                     const AugmentationBasis* basis, bool want_ritz) {
  FlowProblem problem(state.i1, state.i2, lambda, cfg.jacobi_prec, cfg.median_width);
  auto [b_a, b_m] = problem.rhs(stack_fields(state.ux, state.uy));
  TikhonovSystem system{problem.a(), problem.m(), problem.m_inv(), b_a, b_m, lambda};

  AugmentationBasis own_basis;
  if (basis == nullptr && !cfg.jacobi_prec) {
    own_basis = AugmentationBasis::build(
        system.shifted(), problem.kernel_basis(),
        std::vector<BasisLabel>(2, BasisLabel::Kernel));
    basis = &own_basis;
  }

  GnStepResult out;
  RegularizedSolve solve = solve_regularized(system, cfg.solve, basis, want_ritz);
  auto [dux, duy] = unstack_fields(solve.result.x, state.rows(), state.cols());
  out.dux = median_filter(dux, cfg.median_width);
  out.duy = median_filter(duy, cfg.median_width);
  out.solve = std::move(solve.result);
  out.ritz = std::move(solve.ritz);
  return out;
}

FlowResult pyramid_solve(const Image& i1, const Image& i2, double lambda,
                         const FlowConfig& cfg, const std::vector<double>& postprocess) {
  require_same_dim(i1.rows(), i2.rows(), "pyramid_solve");
  require_same_dim(i1.cols(), i2.cols(), "pyramid_solve");
  require(lambda >= 0.0, "pyramid_solve: lambda must be non-negative");

  // Depth: halve while the next level keeps min(N, M) at or above 32 pixels.
  int auto_levels = 1;
  while (std::min(i1.rows(), i1.cols()) / (Index{1} << auto_levels) >= 32) ++auto_levels;

  FlowResult out;
  int levels = cfg.levels > 0 ? cfg.levels : auto_levels;
  int feasible = 1;
  while (feasible < levels &&
         std::min(i1.rows(), i1.cols()) / (Index{1} << feasible) >= 8)
    ++feasible;
  if (levels > feasible) {
    out.levels_clamped = true;
    levels = feasible;
  }
  out.levels_used = levels;

  std::vector<Image> pyr1{i1}, pyr2{i2};
  for (int l = 1; l < levels; ++l) {
    pyr1.push_back(box_downsample(pyr1.back()));
    pyr2.push_back(box_downsample(pyr2.back()));
  }

  Image ux = Image::Zero(pyr1.back().rows(), pyr1.back().cols());
  Image uy = Image::Zero(pyr1.back().rows(), pyr1.back().cols());

  for (int l = levels - 1; l >= 0; --l) {
    const Image& lvl1 = pyr1[l];
    const Image& lvl2 = pyr2[l];
    if (l != levels - 1) {
      ux = 2.0 * upsample_bilinear(ux, lvl1.rows(), lvl1.cols());
      uy = 2.0 * upsample_bilinear(uy, lvl1.rows(), lvl1.cols());
    }

    FlowProblem problem(lvl1, lvl2, lambda, cfg.jacobi_prec, cfg.median_width);
    AugmentationBasis kernel_basis;
    const AugmentationBasis* basis0 = nullptr;
    if (!cfg.jacobi_prec) {
      kernel_basis = AugmentationBasis::build(
          shifted_map(problem.a(), problem.m(), lambda), problem.kernel_basis(),
          std::vector<BasisLabel>(2, BasisLabel::Kernel));
      basis0 = &kernel_basis;
    }

    LambdaFamily family;
    family.lambda0 = lambda;
    if (l == 0) family.postprocess = postprocess;

    MultiLambdaConfig outer_cfg;
    outer_cfg.outer_iterations = cfg.max_outer;
    outer_cfg.recycle_fraction = cfg.recycle_fraction;
    outer_cfg.outer_tol = cfg.outer_tol;

    MultiLambdaResult nl = multi_lambda_outer(problem, family,
                                              stack_fields(ux, uy), cfg.solve,
                                              outer_cfg, basis0);
    auto flow = unstack_fields(nl.states[0], lvl1.rows(), lvl1.cols());
    ux = flow.first;
    uy = flow.second;

    if (l == 0) {
      out.finest_inner_iterations = nl.inner_iterations;
      out.ritz = std::move(nl.last_ritz);
      out.postprocess_lambdas = postprocess;
      for (size_t p = 1; p < nl.states.size(); ++p)
        out.postprocess_flows.push_back(
            unstack_fields(nl.states[p], lvl1.rows(), lvl1.cols()));
    }
  }

  out.ux = std::move(ux);
  out.uy = std::move(uy);
  return out;
}

double gradient_energy(const Image& ux, const Image& uy) {
  return ux.cwiseProduct(neg_laplacian(ux)).sum() +
         uy.cwiseProduct(neg_laplacian(uy)).sum();
}

}  // namespace ritzcg
