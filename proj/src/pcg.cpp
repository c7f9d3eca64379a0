#include "ritzcg/pcg.hpp"

#include <cmath>

namespace ritzcg {

namespace {

constexpr double kBreakdownFloor = 1e-300;

// Running state of the costless recurrences.
struct Recurrences {
  double w_mnorm_sq = 0.0;  // ||w_i||_M^2
  double cross = 0.0;       // w_i^T M (x_i - x_0)
  double corr = 0.0;        // ||x_i - x_0||_M^2
  double t_frob = 0.0;
  double eta_prev = 0.0;
  double alpha_prev = 0.0;
  double beta_prev = 0.0;
  bool first = true;

  // Called with the scalars of iteration i, after beta_i is known.
  void advance(double alpha, double beta, double gamma_next) {
    double mu = first ? 1.0 / alpha : 1.0 / alpha + beta_prev / alpha_prev;
    double eta = std::sqrt(std::max(beta, 0.0)) / alpha;
    t_frob += mu * mu + eta * eta + eta_prev * eta_prev;

    corr += alpha * alpha * w_mnorm_sq + 2.0 * alpha * cross;
    cross = beta * (cross + alpha * w_mnorm_sq);
    w_mnorm_sq = gamma_next + beta * beta * w_mnorm_sq;

    eta_prev = eta;
    alpha_prev = alpha;
    beta_prev = beta;
    first = false;
  }
};

}  // namespace

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::None: return "none";
    case StopReason::ResidualRatio: return "residual-ratio";
    case StopReason::MinresStyle: return "minres-style";
    case StopReason::Stagnation: return "stagnation";
    case StopReason::MaxIter: return "max-iter";
    case StopReason::Breakdown: return "breakdown";
  }
  return "unknown";
}

StopReason stopping_check(const SolveTrace& trace, const SolveConfig& cfg) {
  if (trace.gamma.empty()) return StopReason::None;
  const double gamma_0 = trace.gamma.front();
  const double gamma_i = trace.gamma.back();
  const int m = trace.m();
  const bool zero_residual = gamma_i <= 0.0;

  if (has_criterion(cfg.criteria, StopCriterion::ResidualRatio)) {
    double r_norm = std::sqrt(std::max(gamma_i, 0.0));
    if (zero_residual || r_norm < cfg.eps * std::sqrt(gamma_0) || r_norm < cfg.abs_floor)
      return StopReason::ResidualRatio;
  }
  if (has_criterion(cfg.criteria, StopCriterion::MinresStyle)) {
    if (zero_residual) return StopReason::MinresStyle;
    if (m >= 1) {
      const IterationRecord& last = trace.records.back();
      double bound = cfg.eps * std::sqrt(last.t_frob_sq) * std::sqrt(last.corr_mnorm_sq);
      if (std::sqrt(gamma_i) < bound) return StopReason::MinresStyle;
    }
  }
  if (has_criterion(cfg.criteria, StopCriterion::Stagnation)) {
    if (zero_residual) return StopReason::Stagnation;
    if (m >= cfg.stagnation_window) {
      bool all_small = true;
      for (int i = m - cfg.stagnation_window; i < m; ++i) {
        if (!(trace.records[i].energy_decrement < cfg.eps * cfg.eps)) {
          all_small = false;
          break;
        }
      }
      if (all_small) return StopReason::Stagnation;
    }
  }
  return StopReason::None;
}

SolveResult pcg_solve(const LinearMap& a, const LinearMap& m_inv, const Vector& b,
                      const Vector& x0, const SolveConfig& cfg,
                      const Projector* projector, const IterationObserver& observer) {
  cfg.validate();
  require_same_dim(a.dim(), m_inv.dim(), "pcg_solve: A vs M^-1");
  require_same_dim(a.dim(), b.size(), "pcg_solve: A vs b");
  require_same_dim(a.dim(), x0.size(), "pcg_solve: A vs x0");
  const bool projected = projector != nullptr && !projector->empty();

  SolveResult out;
  SolveTrace& trace = out.trace;
  trace.x0 = x0;

  Vector x = x0;
  Vector r = b - a.apply(x0);
  trace.r0 = r;

  auto precondition = [&](const Vector& res) -> Vector {
    Vector z = m_inv.apply(res);
    if (projected) z = projector->apply(z);
    return z;
  };

  Vector z = precondition(r);
  Vector w = z;
  double gamma = z.dot(r);
  trace.gamma.push_back(gamma);

  if (observer) observer(0, x, r);

  if (gamma < -kBreakdownFloor || !std::isfinite(gamma)) {
    trace.stop_reason = StopReason::Breakdown;
    out.x = x;
    return out;
  }
  if (gamma <= kBreakdownFloor) {
    trace.gamma.back() = std::max(gamma, 0.0);
    trace.stop_reason = stopping_check(trace, cfg);
    if (trace.stop_reason == StopReason::None) trace.stop_reason = StopReason::ResidualRatio;
    out.x = x;
    return out;
  }
  // A too-good initialization can satisfy the absolute safeguard immediately.
  if (cfg.abs_floor > 0.0 && std::sqrt(gamma) < cfg.abs_floor &&
      has_criterion(cfg.criteria, StopCriterion::ResidualRatio)) {
    trace.stop_reason = StopReason::ResidualRatio;
    out.x = x;
    return out;
  }

  // Normalized z-basis bookkeeping for optional reorthogonalization.
  std::vector<Vector> zhat_store;
  std::vector<Vector> mzhat_store;

  auto store_iteration = [&](const Vector& zi, const Vector& mzi, double gamma_i, int i) {
    if (cfg.store_basis) {
      trace.z_store.push_back(zi);
      trace.mz_store.push_back(mzi);
    }
    if (cfg.reorthogonalize && gamma_i > 0.0) {
      double sign = (i % 2 == 0) ? 1.0 : -1.0;
      double inv = sign / std::sqrt(gamma_i);
      zhat_store.push_back(zi * inv);
      mzhat_store.push_back(mzi * inv);
    }
  };

  // M z_i equals r_i on plain runs and P^T r_i = r_i on projected ones.
  store_iteration(z, r, gamma, 0);

  Recurrences rec;
  rec.w_mnorm_sq = gamma;  // ||w_0||_M^2 = gamma_0

  for (int i = 0; i < cfg.max_iter; ++i) {
    Vector q = a.apply(w);
    double delta = w.dot(q);
    if (!(delta > kBreakdownFloor) || !std::isfinite(delta)) {
      trace.stop_reason = StopReason::Breakdown;
      break;
    }
    double alpha = gamma / delta;

    Vector x_prev = x;
    x += alpha * w;
    r -= alpha * q;
    if (projected && cfg.reproject_every > 0 && (i + 1) % cfg.reproject_every == 0)
      r = projector->apply_transpose(r);

    Vector z_next = precondition(r);
    Vector mz_next = r;

    if (cfg.reorthogonalize && !zhat_store.empty()) {
      for (int pass = 0; pass < 2; ++pass) {
        for (size_t j = 0; j < zhat_store.size(); ++j) {
          double coeff = mzhat_store[j].dot(z_next);
          z_next -= coeff * zhat_store[j];
          mz_next -= coeff * mzhat_store[j];
        }
      }
    }

    double gamma_next = z_next.dot(r);
    if (gamma_next < -kBreakdownFloor || !std::isfinite(gamma_next)) {
      x = x_prev;  // roll back to the last valid iterate
      trace.stop_reason = StopReason::Breakdown;
      break;
    }
    if (gamma_next <= kBreakdownFloor) gamma_next = 0.0;

    double beta = gamma_next / gamma;

    IterationRecord record;
    record.alpha = alpha;
    record.beta = beta;
    record.gamma = gamma;
    record.delta = delta;
    record.energy_decrement = gamma * gamma / delta;
    rec.advance(alpha, beta, gamma_next);
    record.corr_mnorm_sq = rec.corr;
    record.t_frob_sq = rec.t_frob;
    trace.records.push_back(record);
    trace.gamma.push_back(gamma_next);

    if (cfg.store_basis) trace.q_store.push_back(q);
    if (observer) observer(i + 1, x, r);

    StopReason reason = stopping_check(trace, cfg);
    if (reason != StopReason::None) {
      trace.stop_reason = reason;
      break;
    }

    gamma = gamma_next;
    w = z_next + beta * w;
    store_iteration(z_next, mz_next, gamma_next, i + 1);
  }

  if (trace.stop_reason == StopReason::None) trace.stop_reason = StopReason::MaxIter;
  if (!all_finite(x)) throw Error("pcg_solve: iterate is not finite");
  out.x = std::move(x);
  return out;
}

TraceNorms trace_norms(const SolveTrace& trace) {
  require(!trace.gamma.empty(), "trace_norms: empty trace");
  TraceNorms norms;
  norms.residual_mnorm_sq = trace.gamma;

  Recurrences rec;
  rec.w_mnorm_sq = trace.gamma.front();
  for (int i = 0; i < trace.m(); ++i) {
    const IterationRecord& record = trace.records[i];
    rec.advance(record.alpha, record.beta, trace.gamma[i + 1]);
    norms.corr_mnorm_sq.push_back(rec.corr);
    norms.t_frob_sq.push_back(rec.t_frob);
    norms.energy_decrement.push_back(record.energy_decrement);
  }
  return norms;
}

}  // namespace ritzcg
