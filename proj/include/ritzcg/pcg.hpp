#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ritzcg/linear_map.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

enum class StopCriterion : unsigned {
  ResidualRatio = 1u << 0,  // ||r_i||_{M^-1} < eps ||r_0||_{M^-1}
  MinresStyle = 1u << 1,    // ||r_i||_{M^-1} < eps ||T_i||_F ||x_i - x_0||_M
  Stagnation = 1u << 2,     // gamma_i^2 / delta_i < eps^2 over a window
};

inline unsigned operator|(StopCriterion a, StopCriterion b) {
  return static_cast<unsigned>(a) | static_cast<unsigned>(b);
}
inline unsigned operator|(unsigned a, StopCriterion b) {
  return a | static_cast<unsigned>(b);
}
inline bool has_criterion(unsigned mask, StopCriterion c) {
  return (mask & static_cast<unsigned>(c)) != 0;
}

struct SolveConfig {
  double eps = 1e-8;
  int max_iter = 1000;
  unsigned criteria = static_cast<unsigned>(StopCriterion::ResidualRatio);
  int stagnation_window = 3;
  double abs_floor = 0.0;   // safeguard: sqrt(gamma) below this stops
  bool store_basis = false;  // retain z/q/Mz vectors for Ritz extraction
  bool reorthogonalize = false;  // full M-reorthogonalization of z (Ritz-quality runs)
  int reproject_every = 50;  // projected runs: refresh C^T r = 0 periodically

  void validate() const {
    require(eps > 0.0, "SolveConfig: eps must be positive");
    require(max_iter > 0, "SolveConfig: max_iter must be positive");
    require(criteria != 0, "SolveConfig: at least one stopping criterion");
    require(stagnation_window > 0, "SolveConfig: stagnation_window must be positive");
    require(abs_floor >= 0.0, "SolveConfig: abs_floor must be non-negative");
  }
};

enum class StopReason {
  None,
  ResidualRatio,
  MinresStyle,
  Stagnation,
  MaxIter,
  Breakdown,
};

const char* to_string(StopReason reason);

/// Scalars of one CG iteration plus the costless norm recurrences.
struct IterationRecord {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;  // gamma_i at iteration start
  double delta = 0.0;
  double corr_mnorm_sq = 0.0;     // ||x_{i+1} - x_0||_M^2
  double t_frob_sq = 0.0;         // running Frobenius estimate of the tridiagonal
  double energy_decrement = 0.0;  // gamma_i^2 / delta_i
};

struct SolveTrace {
  std::vector<IterationRecord> records;
  std::vector<double> gamma;  // gamma_0 .. gamma_m
  std::vector<Vector> z_store;
  std::vector<Vector> q_store;
  std::vector<Vector> mz_store;  // M z_i (equals r_i on plain runs)
  Vector x0;
  Vector r0;
  Vector r_a0;  // separate right-hand-side split, set by regularized solves
  Vector r_m0;
  bool has_split = false;
  StopReason stop_reason = StopReason::None;

  int m() const { return static_cast<int>(records.size()); }
  bool has_basis() const { return !z_store.empty(); }
};

struct SolveResult {
  Vector x;
  SolveTrace trace;

  bool converged() const {
    return trace.stop_reason == StopReason::ResidualRatio ||
           trace.stop_reason == StopReason::MinresStyle ||
           trace.stop_reason == StopReason::Stagnation;
  }
};

/// Oblique projector interface used by augmented runs.
class Projector {
 public:
  virtual ~Projector() = default;
  virtual Vector apply(const Vector& v) const = 0;            // P v
  virtual Vector apply_transpose(const Vector& v) const = 0;  // P^T v
  virtual bool empty() const { return false; }
};

using IterationObserver =
    std::function<void(int iter, const Vector& x, const Vector& r)>;

/**
 * Preconditioned conjugate gradient on A x = b with preconditioner action
 * M^-1, optionally projected for augmented runs.
 *
 * The trace carries every per-iteration scalar plus the recurrence values; z,
 * q and Mz vectors are retained when cfg.store_basis is set. Breakdown
 * (gamma or delta non-positive) flags the result and rolls the iterate back
 * to the last valid one; hitting max_iter flags the result, neither throws.
 *
 * With a projector, r0 must already satisfy C^T r0 = 0 (use augmented_init).
 */
SolveResult pcg_solve(const LinearMap& a, const LinearMap& m_inv, const Vector& b,
                      const Vector& x0, const SolveConfig& cfg,
                      const Projector* projector = nullptr,
                      const IterationObserver& observer = nullptr);

/// Evaluates the enabled stopping criteria on the current trace state.
StopReason stopping_check(const SolveTrace& trace, const SolveConfig& cfg);

/// Per-iteration norm series recomputed from the trace scalars alone.
struct TraceNorms {
  std::vector<double> residual_mnorm_sq;  // gamma_i, size m+1
  std::vector<double> corr_mnorm_sq;      // ||x_{i+1} - x_0||_M^2, size m
  std::vector<double> t_frob_sq;          // size m
  std::vector<double> energy_decrement;   // gamma_i^2 / delta_i, size m
};

TraceNorms trace_norms(const SolveTrace& trace);

}  // namespace ritzcg
