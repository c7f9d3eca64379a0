#pragma once

#include <optional>
#include <vector>

#include "ritzcg/pcg.hpp"
#include "ritzcg/ritz.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

/**
 * Cauchy data-completion case on the rectangle [0, T] x [0, H]: homogeneous
 * Dirichlet on y = 0 and y = H, both Dirichlet data sin(k pi y / H) and zero
 * Neumann flux on x = 0, nothing prescribed on x = T. The trace on x = T is
 * the unknown.
 */
struct CauchyCase {
  double height = 1.0;     // H
  double thickness = 1.0;  // T
  int wavenumber = 3;      // k
  int n_el = 40;           // elements per side
  double snr_db = 10.0;    // infinity = no noise
  std::uint64_t seed = 0;

  void validate() const {
    require(n_el >= 4, "CauchyCase: n_el must be at least 4");
    require(wavenumber >= 1, "CauchyCase: wavenumber must be at least 1");
    require(height > 0.0 && thickness > 0.0, "CauchyCase: positive dimensions");
  }
};

/// Steklov-Poincare operators condensed on the interior trace nodes of x = T,
/// plus the load carried over from the Dirichlet data.
struct SteklovPair {
  Matrix s_d;       // Dirichlet-side operator, SPD
  Matrix s_n;       // Neumann-side operator
  Vector b_d;       // Schur-reduced load from u_L
  Vector trace_y;   // y coordinates of the trace nodes
  Vector u_l;       // the (possibly noisy) Dirichlet signal actually used
};

/// Q1 assembly and Schur condensation; noise with the requested SNR is
/// injected into the Dirichlet signal before the load is reduced.
SteklovPair assemble_case(const CauchyCase& c);

/// Samples sin(k pi y / H) cosh(k pi T / H) at the trace nodes.
Vector analytic_trace(const CauchyCase& c);

/// Additive Gaussian white noise at the requested signal-to-noise ratio,
/// deterministic under the seed. An infinite snr_db returns v unchanged.
Vector add_noise(const Vector& v, double snr_db, std::uint64_t seed);

enum class CompareMethod { Tsvd, DirectTikhonov, Cg };
enum class PrecKind { Identity, Jacobi, SteklovD };
enum class RegKind { Identity, SteklovD };

struct ComparisonConfig {
  CompareMethod method = CompareMethod::Cg;
  double eps_sigma = 1e-3;             // tsvd truncation
  RegKind regularizer = RegKind::SteklovD;
  PrecKind prec = PrecKind::SteklovD;  // cg path
  double lambda = 1e-9;
  double eps = 1e-9;
  int max_iter = 200;
  unsigned criteria = static_cast<unsigned>(StopCriterion::MinresStyle);
  bool want_ritz = true;
};

struct LCurveSeries {
  std::vector<double> err_axis;   // natural: A-norm error offset; euclid: ||r||_2^2
  std::vector<double> norm_axis;  // natural: M-norm^2 of the correction; euclid: ||x - x0||_2^2
};

struct ComparisonResult {
  Vector u_r;
  SolveTrace trace;                    // cg path only
  LCurveSeries natural;
  LCurveSeries euclid;
  std::optional<RitzSet> ritz;
  double lambda = 0.0;
};

ComparisonResult run_comparison(const CauchyCase& c, const ComparisonConfig& cfg);
ComparisonResult run_comparison(const SteklovPair& pair, const ComparisonConfig& cfg);

}  // namespace ritzcg
