#include "ritzcg/tikhonov.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "ritzcg/dense_eig.hpp"

namespace ritzcg {

RegularizedSolve solve_regularized(const TikhonovSystem& system, const SolveConfig& cfg,
                                   const AugmentationBasis* basis, bool want_ritz,
                                   const IterationObserver& observer) {
  system.validate();
  LinearMap a_lambda = system.shifted();
  Vector b = system.rhs();

  Vector x00 = Vector::Zero(system.a.dim());
  SolveConfig solve_cfg = cfg;
  if (want_ritz) solve_cfg.store_basis = true;

  RegularizedSolve out;
  const bool augmented = basis != nullptr && !basis->empty();
  Vector x0 = x00;
  if (augmented) x0 = basis->init(x00, b, a_lambda).first;

  out.result = pcg_solve(a_lambda, system.m_inv, b, x0, solve_cfg,
                         augmented ? basis : nullptr, observer);

  if (want_ritz) {
    SolveTrace& trace = out.result.trace;
    trace.r_a0 = system.b_a - system.a.apply(x0);
    trace.r_m0 = system.b_m - system.m.apply(x0);
    trace.has_split = true;
    if (trace.m() >= 1) out.ritz = extract_ritz(trace, system.lambda);
  }
  return out;
}

std::vector<SweepPoint> lambda_sweep(const RitzSet& ritz, const Vector& x0,
                                     const std::vector<double>& grid) {
  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (double lambda : grid) {
    require(lambda >= 0.0, "lambda_sweep: weights must be non-negative");
    SweepPoint point;
    point.lambda = lambda;
    point.x = filtered_solution(ritz, x0, lambda, ritz.m);
    auto curve = ritz_lcurve(ritz, lambda);
    point.mnorm_sq = curve.back().mnorm_sq;
    point.err_offset = curve.back().err_offset;
    points.push_back(std::move(point));
  }
  return points;
}

MultiLambdaResult multi_lambda_outer(const NonlinearProblem& problem,
                                     const LambdaFamily& family,
                                     const Vector& initial_state,
                                     const SolveConfig& cfg,
                                     const MultiLambdaConfig& outer_cfg,
                                     const AugmentationBasis* basis0) {
  require(outer_cfg.outer_iterations >= 1, "multi_lambda_outer: need outer iterations");
  for (double lambda : family.postprocess)
    require(lambda >= 0.0, "multi_lambda_outer: weights must be non-negative");

  MultiLambdaResult out;
  out.lambdas = family.all();
  const size_t n_lambda = out.lambdas.size();
  out.states.assign(n_lambda, initial_state);

  AugmentationBasis recycled_basis;
  const AugmentationBasis* basis = basis0;
  double merit = problem.objective(initial_state);

  for (int k = 0; k < outer_cfg.outer_iterations; ++k) {
    // Right-hand sides for every weight at its own state.
    std::vector<std::pair<Vector, Vector>> rhs(n_lambda);
    for (size_t p = 0; p < n_lambda; ++p) rhs[p] = problem.rhs(out.states[p]);

    TikhonovSystem system{problem.a(), problem.m(), problem.m_inv(),
                          rhs[0].first, rhs[0].second, family.lambda0};
    RegularizedSolve solve = solve_regularized(system, cfg, basis, /*want_ritz=*/true);

    if (solve.result.trace.stop_reason == StopReason::Breakdown &&
        solve.result.trace.m() == 0) {
      out.aborted = true;
      return out;
    }
    Vector delta0 = solve.result.x;
    double step_scale = 1.0;
    Vector candidate = problem.update(out.states[0], delta0);

    // Merit safeguard: backtrack a step that stops decreasing the objective,
    // stop the outer loop once no damping helps.
    if (std::isfinite(merit)) {
      bool accepted = false;
      for (double scale : {1.0, 0.5, 0.25}) {
        Vector trial = scale == 1.0 ? candidate
                                    : problem.update(out.states[0], Vector(scale * delta0));
        double trial_merit = problem.objective(trial);
        if (trial_merit < merit) {
          merit = trial_merit;
          candidate = std::move(trial);
          step_scale = scale;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }

    out.inner_iterations.push_back(solve.result.trace.m());
    out.states[0] = std::move(candidate);
    if (solve.ritz) out.last_ritz = solve.ritz;
    if (!solve.ritz) {  // converged at initialization, nothing to postprocess with
      out.completed_outer = k + 1;
      if (outer_cfg.outer_tol > 0.0) break;
      continue;
    }
    const RitzSet& ritz = *solve.ritz;

    for (size_t p = 1; p < n_lambda; ++p) {
      double lambda_p = out.lambdas[p];
      Vector b_p = rhs[p].first + lambda_p * rhs[p].second;
      Vector x0p = Vector::Zero(b_p.size());
      if (basis != nullptr && !basis->empty()) {
        // Augmented part of the reconstruction; exact for kernel bases, whose
        // Gram matrix does not depend on the weight.
        x0p = basis->c() * basis->solve_gram(basis->c().transpose() * b_p);
      }
      RitzSet shifted = ritz;
      shifted.r_a = ritz.vectors.transpose() * (rhs[p].first - problem.a().apply(x0p));
      shifted.r_m = ritz.vectors.transpose() * (rhs[p].second - problem.m().apply(x0p));
      int index = outer_cfg.truncate_at_corner && ritz.m >= 2 ? corner_index(ritz) : ritz.m;
      Vector delta = filtered_solution(shifted, x0p, lambda_p, index);
      if (step_scale != 1.0) delta *= step_scale;  // share the lambda0 damping
      out.states[p] = problem.update(out.states[p], delta);
    }

    if (outer_cfg.recycle_fraction > 0.0 && solve.result.trace.m() >= 1) {
      // The basis lives against the solve operator A + lambda0 M, matching
      // the stored q vectors behind ritz_apply_a.
      TridiagEig eig = tridiag_eig(build_tridiagonal(solve.result.trace));
      Matrix av = ritz_apply_a(solve.result.trace, eig);
      int keep = static_cast<int>(
          std::ceil(outer_cfg.recycle_fraction * solve.result.trace.m()));
      AugmentationBasis seed = basis != nullptr ? *basis : AugmentationBasis();
      recycled_basis = recycle(seed, shifted_map(problem.a(), problem.m(), family.lambda0),
                               ritz, av, keep);
      basis = &recycled_basis;
    }
    out.completed_outer = k + 1;

    if (outer_cfg.outer_tol > 0.0) {
      Vector step = step_scale * delta0;
      double delta_m = std::sqrt(std::max(step.dot(problem.m().apply(step)), 0.0));
      double state_m =
          std::sqrt(std::max(out.states[0].dot(problem.m().apply(out.states[0])), 0.0));
      if (delta_m <= outer_cfg.outer_tol * std::max(state_m, 1e-30)) break;
    }
  }
  return out;
}

LinearMap make_dense_inverse_map(const Matrix& m) {
  auto lower = std::make_shared<Matrix>(cholesky_lower(m));
  Index n = m.rows();
  return LinearMap(n, MapKind::MatrixFree, [lower](const Vector& v) -> Vector {
    return cholesky_solve(*lower, v);
  });
}

}  // namespace ritzcg
