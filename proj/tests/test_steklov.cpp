#include <doctest.h>

#include <ritzcg/dense_eig.hpp>
#include <ritzcg/steklov.hpp>
#include <ritzcg/tikhonov.hpp>

#include <limits>

#include "test_helpers.hpp"

using namespace ritzcg;
using namespace ritzcg::testing;

namespace {

constexpr double kNoNoise = std::numeric_limits<double>::infinity();

CauchyCase coarse_case(int k = 1) {
  CauchyCase c;
  c.n_el = 8;
  c.wavenumber = k;
  c.snr_db = kNoNoise;
  return c;
}

}  // namespace

TEST_CASE("analytic_trace: direct formula evaluation") {
  CauchyCase c;
  c.n_el = 8;
  c.wavenumber = 3;
  Vector u = analytic_trace(c);
  // Node y = 0.5 is index 3 on the 8-element grid.
  CHECK(u[3] == doctest::Approx(std::sin(1.5 * M_PI) * std::cosh(3 * M_PI)));
  CHECK(u[3] == doctest::Approx(-std::cosh(3 * M_PI)));
}

TEST_CASE("analytic_trace: vanishes toward the clamped edges and grows with k") {
  double previous = 0.0;
  for (int k = 1; k <= 5; ++k) {
    CauchyCase c = coarse_case(k);
    Vector u = analytic_trace(c);
    double magnitude = u.cwiseAbs().maxCoeff();
    CHECK(magnitude > previous);
    previous = magnitude;
  }
}

TEST_CASE("add_noise: infinite SNR leaves the signal unchanged") {
  Rng rng(1301);
  Vector v = rng.normal_vector(20);
  CHECK(rel_error(add_noise(v, kNoNoise, 7), v) == doctest::Approx(0.0));
}

TEST_CASE("add_noise: same seed gives identical output bits") {
  Rng rng(1302);
  Vector v = rng.normal_vector(20);
  Vector a = add_noise(v, 10.0, 42);
  Vector b = add_noise(v, 10.0, 42);
  for (Index i = 0; i < v.size(); ++i) CHECK(a[i] == b[i]);
  Vector c = add_noise(v, 10.0, 43);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("add_noise: empirical SNR over many seeds is close to the target") {
  Rng rng(1303);
  Vector v = rng.normal_vector(39);
  const double snr_db = 10.0;
  double noise_energy = 0.0;
  const int trials = 1000;
  for (int seed = 0; seed < trials; ++seed) {
    Vector noisy = add_noise(v, snr_db, seed);
    noise_energy += (noisy - v).squaredNorm();
  }
  double empirical_db = 10.0 * std::log10(v.squaredNorm() / (noise_energy / trials));
  CHECK(std::abs(empirical_db - snr_db) < 0.5);
}

TEST_CASE("assemble_case: operators are symmetric and S_D is SPD") {
  SteklovPair pair = assemble_case(coarse_case());
  CHECK((pair.s_d - pair.s_d.transpose()).norm() <= 1e-10 * pair.s_d.norm());
  CHECK((pair.s_n - pair.s_n.transpose()).norm() <= 1e-10 * pair.s_n.norm());
  CHECK_NOTHROW(cholesky_lower(pair.s_d));

  // Energy interpretation: u^T S_D u > 0 for u != 0.
  Rng rng(1311);
  for (int trial = 0; trial < 5; ++trial) {
    Vector u = rng.normal_vector(pair.b_d.size());
    CHECK(u.dot(pair.s_d * u) > 0.0);
  }
}

TEST_CASE("assemble_case: (S_D - S_N) is PSD with fast eigenvalue decay") {
  SteklovPair pair = assemble_case(coarse_case());
  DenseSpectrum gap = dense_sym_eig(pair.s_d - pair.s_n);
  CHECK(gap.values[0] > 0.0);
  CHECK(gap.values[gap.values.size() - 1] > -1e-12 * gap.values[0]);
  // Compactness signature over the first five values.
  for (int i = 0; i + 1 < 5; ++i)
    CHECK(gap.values[i + 1] <= 1e-2 * gap.values[i]);
}

TEST_CASE("assemble_case: exact solve recovers the analytic trace within FEM error") {
  // The trailing eigenvalues of (S_D - S_N) sit below double round-off, so the
  // numerically exact solve keeps every mode above the round-off floor.
  CauchyCase c = coarse_case(1);
  SteklovPair pair = assemble_case(c);
  Vector u_r = tsvd_solve(pair.s_d - pair.s_n, pair.b_d, 1e-12);
  Vector reference = analytic_trace(c);
  CHECK(rel_error(u_r, reference) < 0.05);
}

TEST_CASE("run_comparison: tsvd and direct Tikhonov baselines stay bounded") {
  CauchyCase c = coarse_case(1);
  SteklovPair pair = assemble_case(c);
  Vector reference = analytic_trace(c);

  ComparisonConfig tsvd_cfg;
  tsvd_cfg.method = CompareMethod::Tsvd;
  tsvd_cfg.eps_sigma = 1e-3;
  ComparisonResult tsvd = run_comparison(pair, tsvd_cfg);
  CHECK(all_finite(tsvd.u_r));
  CHECK(rel_error(tsvd.u_r, reference) < 0.2);

  ComparisonConfig direct_cfg;
  direct_cfg.method = CompareMethod::DirectTikhonov;
  direct_cfg.regularizer = RegKind::SteklovD;
  direct_cfg.lambda = 1e-9;
  ComparisonResult direct = run_comparison(pair, direct_cfg);
  CHECK(all_finite(direct.u_r));
  CHECK(rel_error(direct.u_r, reference) < 0.2);
}

TEST_CASE("run_comparison: tsvd keeping three modes tracks the regularized direct solve") {
  CauchyCase c;
  c.n_el = 20;
  c.wavenumber = 1;
  c.snr_db = kNoNoise;
  SteklovPair pair = assemble_case(c);

  DenseSpectrum gap = dense_sym_eig(pair.s_d - pair.s_n);
  // Threshold placed to keep exactly three modes.
  double eps_sigma = std::sqrt(gap.values[3] * gap.values[2]) / gap.values[0];
  ComparisonConfig tsvd_cfg;
  tsvd_cfg.method = CompareMethod::Tsvd;
  tsvd_cfg.eps_sigma = eps_sigma;
  ComparisonResult tsvd = run_comparison(pair, tsvd_cfg);

  ComparisonConfig direct_cfg;
  direct_cfg.method = CompareMethod::DirectTikhonov;
  direct_cfg.regularizer = RegKind::SteklovD;
  direct_cfg.lambda = 1e-9;
  ComparisonResult direct = run_comparison(pair, direct_cfg);

  CHECK(all_finite(tsvd.u_r));
  // Both identifications are smooth and bounded, and agree in scale.
  double scale = direct.u_r.norm();
  CHECK(tsvd.u_r.norm() < 3.0 * scale);
  CHECK(tsvd.u_r.norm() > 0.3 * scale);
}

TEST_CASE("run_comparison: KMF-preconditioned CG beats Jacobi at a matched budget") {
  CauchyCase c;
  c.n_el = 20;
  c.wavenumber = 1;
  c.snr_db = 10.0;
  c.seed = 5;
  SteklovPair pair = assemble_case(c);
  Vector reference = analytic_trace(c);

  ComparisonConfig kmf;
  kmf.method = CompareMethod::Cg;
  kmf.prec = PrecKind::SteklovD;
  kmf.lambda = 0.0;
  kmf.eps = 1e-9;
  kmf.max_iter = 20;
  ComparisonResult kmf_run = run_comparison(pair, kmf);

  ComparisonConfig jacobi = kmf;
  jacobi.prec = PrecKind::Jacobi;
  jacobi.want_ritz = false;
  ComparisonResult jacobi_run = run_comparison(pair, jacobi);

  CHECK(rel_error(kmf_run.u_r, reference) < rel_error(jacobi_run.u_r, reference));
}

TEST_CASE("run_comparison: slight Tikhonov shift lets Jacobi reduce the error") {
  CauchyCase c;  // reference setup: 40x40 mesh, k = 3, 10 dB
  c.seed = 5;
  SteklovPair pair = assemble_case(c);
  Vector reference = analytic_trace(c);

  ComparisonConfig jacobi;
  jacobi.method = CompareMethod::Cg;
  jacobi.prec = PrecKind::Jacobi;
  jacobi.lambda = 1e-9;
  jacobi.eps = 1e-12;
  jacobi.max_iter = 20;
  jacobi.want_ritz = false;
  jacobi.criteria = static_cast<unsigned>(StopCriterion::ResidualRatio);

  // Error vs the reference after 0 iterations (zero init) and after 20.
  ComparisonResult run = run_comparison(pair, jacobi);
  double initial_error = reference.norm();
  CHECK((run.u_r - reference).norm() < initial_error);
}

TEST_CASE("run_comparison: natural frame is monotone, Euclidean need not be") {
  CauchyCase c;
  c.n_el = 20;
  c.wavenumber = 3;
  c.snr_db = 10.0;
  c.seed = 1;
  SteklovPair pair = assemble_case(c);

  ComparisonConfig cfg;
  cfg.method = CompareMethod::Cg;
  cfg.prec = PrecKind::SteklovD;
  cfg.lambda = 1e-9;
  cfg.eps = 1e-9;
  cfg.max_iter = 40;
  ComparisonResult run = run_comparison(pair, cfg);

  for (size_t i = 1; i < run.natural.err_axis.size(); ++i) {
    CHECK(run.natural.err_axis[i] <= run.natural.err_axis[i - 1] + 1e-15);
    CHECK(run.natural.norm_axis[i] >= run.natural.norm_axis[i - 1] - 1e-15);
  }
}

TEST_CASE("run_comparison: KMF natural L-curve ends norm-growth dominated") {
  CauchyCase c;
  c.n_el = 20;
  c.wavenumber = 3;
  c.snr_db = 10.0;
  c.seed = 2;
  SteklovPair pair = assemble_case(c);

  ComparisonConfig cfg;
  cfg.method = CompareMethod::Cg;
  cfg.prec = PrecKind::SteklovD;
  cfg.lambda = 0.0;
  cfg.eps = 1e-9;
  cfg.max_iter = 60;
  cfg.criteria = static_cast<unsigned>(StopCriterion::MinresStyle);
  ComparisonResult run = run_comparison(pair, cfg);
  REQUIRE(run.natural.norm_axis.size() >= 3);

  // Final step: the solution-norm share of the move dwarfs the error share.
  size_t last = run.natural.norm_axis.size() - 1;
  double norm_total = run.natural.norm_axis[last];
  double err_total = run.natural.err_axis[last] - run.natural.err_axis[0];
  double norm_step = run.natural.norm_axis[last] - run.natural.norm_axis[last - 1];
  double err_step = run.natural.err_axis[last] - run.natural.err_axis[last - 1];
  CHECK(norm_step / std::abs(norm_total) > std::abs(err_step / err_total));
}

TEST_CASE("picard_table: weights below the shift are rectified in the Steklov case") {
  CauchyCase c;
  c.n_el = 20;
  c.wavenumber = 3;
  c.snr_db = 10.0;
  c.seed = 3;
  SteklovPair pair = assemble_case(c);

  ComparisonConfig cfg;
  cfg.method = CompareMethod::Cg;
  cfg.prec = PrecKind::SteklovD;
  cfg.lambda = 1e-9;
  cfg.eps = 1e-12;
  cfg.max_iter = 60;
  cfg.criteria = static_cast<unsigned>(StopCriterion::ResidualRatio);
  ComparisonResult run = run_comparison(pair, cfg);
  REQUIRE(run.ritz);
  const RitzSet& ritz = *run.ritz;

  int rectified = 0;
  for (int j = 0; j < ritz.m; ++j) {
    if (ritz.theta[j] < cfg.lambda) {
      ++rectified;
      // The shifted spectrum flattens at the regularization weight.
      CHECK(ritz.theta_solve(j) >= cfg.lambda * 0.99);
      CHECK(ritz.theta_solve(j) <= cfg.lambda * 2.01);
    } else {
      CHECK(ritz.theta_solve(j) >= 2.0 * cfg.lambda * 0.99);
    }
  }
  CHECK(rectified >= 1);
}

TEST_CASE("lambda_sweep approximates the direct-solve L-curve for the Steklov case") {
  CauchyCase c;
  c.n_el = 20;
  c.wavenumber = 3;
  c.snr_db = 10.0;
  c.seed = 4;
  SteklovPair pair = assemble_case(c);
  Matrix gap = pair.s_d - pair.s_n;
  Vector x_ref = analytic_trace(c);  // known reference for this academic case

  ComparisonConfig cfg;
  cfg.method = CompareMethod::Cg;
  cfg.prec = PrecKind::SteklovD;
  cfg.lambda = 1e-9;
  cfg.eps = 1e-9;
  cfg.max_iter = 80;
  cfg.criteria = static_cast<unsigned>(StopCriterion::ResidualRatio);
  ComparisonResult run = run_comparison(pair, cfg);
  REQUIRE(run.ritz);

  std::vector<double> grid{1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  auto sweep = lambda_sweep(*run.ritz, Vector::Zero(x_ref.size()), grid);

  // Direct curve measured against the known reference; the error axes carry
  // different unknown offsets, so both are aligned at their lambda -> 0
  // vertical asymptote before comparing, as for the published overlay.
  double base = x_ref.dot(gap * x_ref);
  std::vector<double> direct_mnorm, direct_err;
  for (double lambda : grid) {
    Matrix shifted = gap + lambda * pair.s_d;
    Vector direct = shifted.ldlt().solve(pair.b_d);
    direct_mnorm.push_back(direct.dot(pair.s_d * direct));
    Vector err = direct - x_ref;
    direct_err.push_back(err.dot(gap * err) - base);
  }

  double direct_range = direct_err.back() - direct_err.front();
  REQUIRE(direct_range > 0.0);
  for (size_t i = 0; i < grid.size(); ++i) {
    double ratio = sweep[i].mnorm_sq / direct_mnorm[i];
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
    double sweep_aligned = sweep[i].err_offset - sweep.front().err_offset;
    double direct_aligned = direct_err[i] - direct_err.front();
    CHECK(std::abs(sweep_aligned - direct_aligned) <= 0.5 * direct_range);
  }
}
