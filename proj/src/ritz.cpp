#include "ritzcg/ritz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ritzcg/dense_eig.hpp"

namespace ritzcg {

namespace {

constexpr double kOrthoTolerance = 1e-4;  // V^T M V deviation marking a degraded set

// Leading block of G whose deviation from identity stays within tolerance.
int leading_orthonormal_block(const Matrix& gram) {
  const Index m = gram.rows();
  int good = 0;
  for (Index k = 1; k <= m; ++k) {
    double dev = (gram.topLeftCorner(k, k) - Matrix::Identity(k, k))
                     .cwiseAbs()
                     .maxCoeff();
    if (dev > kOrthoTolerance) break;
    good = static_cast<int>(k);
  }
  return good;
}

}  // namespace

Matrix TridiagonalMatrix::materialize() const {
  const Index n = size();
  Matrix t = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) t(j, j) = diag[j];
  for (Index j = 0; j + 1 < n; ++j) {
    t(j, j + 1) = offdiag[j];
    t(j + 1, j) = offdiag[j];
  }
  return t;
}

TridiagonalMatrix build_tridiagonal(const SolveTrace& trace) {
  const int m = trace.m();
  require(m >= 1, "build_tridiagonal: trace has no iterations");
  TridiagonalMatrix t;
  t.diag.resize(m);
  t.offdiag.resize(std::max(m - 1, 0));
  for (int j = 0; j < m; ++j) {
    double alpha = trace.records[j].alpha;
    if (alpha == 0.0)
      throw Error("build_tridiagonal: zero alpha at iteration " + std::to_string(j));
    t.diag[j] = 1.0 / alpha;
    if (j > 0) {
      double alpha_prev = trace.records[j - 1].alpha;
      double beta_prev = trace.records[j - 1].beta;
      t.diag[j] += beta_prev / alpha_prev;
      t.offdiag[j - 1] = std::sqrt(std::max(beta_prev, 0.0)) / alpha_prev;
    }
  }
  return t;
}

TridiagEig tridiag_eig(const TridiagonalMatrix& t) {
  DenseSpectrum spec = dense_sym_eig(t.materialize());
  return {spec.values, spec.vectors};
}

RitzSet ritz_vectors(const SolveTrace& trace, const TridiagEig& eig) {
  const int m = trace.m();
  require(m >= 1, "ritz_vectors: trace has no iterations");
  require(static_cast<int>(trace.z_store.size()) >= m,
          "ritz_vectors: z store was not retained for this solve");
  require_same_dim(eig.values.size(), m, "ritz_vectors: eigendecomposition size");

  const Index n = trace.z_store.front().size();
  Matrix zhat(n, m);
  for (int j = 0; j < m; ++j) {
    double gamma_j = trace.gamma[j];
    require(gamma_j > 0.0, "ritz_vectors: non-positive gamma in trace");
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    zhat.col(j) = trace.z_store[j] * (sign / std::sqrt(gamma_j));
  }

  RitzSet ritz;
  ritz.m = m;
  ritz.theta = eig.values;
  ritz.vectors = zhat * eig.vectors;

  if (trace.has_split) {
    ritz.r_a = ritz.vectors.transpose() * trace.r_a0;
    ritz.r_m = ritz.vectors.transpose() * trace.r_m0;
  } else {
    ritz.r_a = ritz.vectors.transpose() * trace.r0;
    ritz.r_m = Vector::Zero(m);
  }

  // Quality safeguard: Zhat^T M Zhat is computable from the stored pairs
  // since M z_j = r_j (the mz store) on Ritz-grade runs.
  ritz.valid_count = m;
  if (static_cast<int>(trace.mz_store.size()) >= m) {
    Matrix gram(m, m);
    for (int i = 0; i < m; ++i) {
      double si = ((i % 2 == 0) ? 1.0 : -1.0) / std::sqrt(trace.gamma[i]);
      for (int j = 0; j < m; ++j) {
        double sj = ((j % 2 == 0) ? 1.0 : -1.0) / std::sqrt(trace.gamma[j]);
        gram(i, j) = si * sj * trace.z_store[i].dot(trace.mz_store[j]);
      }
    }
    Matrix vmv = eig.vectors.transpose() * gram * eig.vectors;
    double deviation = (vmv - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
    if (deviation > kOrthoTolerance) {
      ritz.degraded = true;
      ritz.valid_count = leading_orthonormal_block(vmv);
    }
  }
  return ritz;
}

RitzSet extract_ritz(const SolveTrace& trace, double lambda_solve) {
  TridiagEig eig = tridiag_eig(build_tridiagonal(trace));
  RitzSet ritz = ritz_vectors(trace, eig);
  ritz.lambda_solve = lambda_solve;
  ritz.theta.array() -= lambda_solve;
  return ritz;
}

Matrix ritz_apply_a(const SolveTrace& trace, const TridiagEig& eig) {
  const int m = trace.m();
  require(m >= 1, "ritz_apply_a: trace has no iterations");
  require(static_cast<int>(trace.q_store.size()) >= m,
          "ritz_apply_a: q store was not retained for this solve");

  const Index n = trace.q_store.front().size();
  Matrix a_zhat(n, m);
  a_zhat.col(0) = trace.q_store[0] / std::sqrt(trace.gamma[0]);
  for (int j = 1; j < m; ++j) {
    double beta_prev = trace.records[j - 1].beta;
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    a_zhat.col(j) = sign * (trace.q_store[j] - beta_prev * trace.q_store[j - 1]) /
                    std::sqrt(trace.gamma[j]);
  }
  return a_zhat * eig.vectors;
}

std::pair<Matrix, Matrix> a_normalize(const RitzSet& ritz, const Matrix& av) {
  require_same_dim(av.cols(), ritz.m, "a_normalize: AV columns");
  const double floor = 1e-14 * std::max(ritz.theta_solve(0), 0.0);
  int kept = 0;
  for (Index j = 0; j < ritz.m; ++j) {
    double ts = ritz.theta_solve(j);
    if (ts > floor)
      ++kept;
    else
      break;  // theta descending: everything past here is at or below round-off
  }
  require(kept > 0, "a_normalize: no positive Ritz values");
  Matrix v(ritz.vectors.rows(), kept);
  Matrix av_scaled(av.rows(), kept);
  for (int j = 0; j < kept; ++j) {
    double scale = 1.0 / std::sqrt(ritz.theta_solve(j));
    v.col(j) = ritz.vectors.col(j) * scale;
    av_scaled.col(j) = av.col(j) * scale;
  }
  return {v, av_scaled};
}

Vector filtered_solution(const RitzSet& ritz, const Vector& x0, double lambda, int i,
                         FilterStats* stats) {
  require(i >= 0 && i <= ritz.m, "filtered_solution: index out of range");
  require(lambda >= 0.0, "filtered_solution: lambda must be non-negative");
  const double floor = 1e-14 * std::max(ritz.theta[0] + lambda, 0.0);
  Vector x = x0;
  int dropped = 0;
  for (int j = 0; j < i; ++j) {
    double denom = ritz.theta[j] + lambda;
    if (!(denom > floor)) {
      ++dropped;
      continue;
    }
    double coeff = (ritz.r_a[j] + lambda * ritz.r_m[j]) / denom;
    x += coeff * ritz.vectors.col(j);
  }
  if (stats) stats->dropped = dropped;
  return x;
}

std::vector<LCurvePoint> ritz_lcurve(const RitzSet& ritz, double lambda) {
  const double floor = 1e-14 * std::max(ritz.theta[0] + lambda, 0.0);
  std::vector<LCurvePoint> points(ritz.m + 1);
  double mnorm = 0.0, drop = 0.0, offset = 0.0;
  points[0] = {0.0, 0.0, 0.0};
  for (int j = 0; j < ritz.m; ++j) {
    double denom = ritz.theta[j] + lambda;
    if (denom > floor) {
      double contrib = ritz.r_a[j] + lambda * ritz.r_m[j];
      double coeff = contrib / denom;
      mnorm += coeff * coeff;
      drop += contrib * contrib / denom;
      offset += coeff * (ritz.theta[j] * contrib / denom - 2.0 * ritz.r_a[j]);
    }
    points[j + 1] = {mnorm, drop, offset};
  }
  return points;
}

int corner_index(const RitzSet& ritz) {
  require(ritz.m >= 2, "corner_index: need at least two Ritz values");
  int best = 1;
  double best_jump = -std::numeric_limits<double>::infinity();
  for (int j = 0; j + 1 < ritz.m; ++j) {
    double jump = 1.0 / ritz.theta[j + 1] - 1.0 / ritz.theta[j];
    if (jump > best_jump) {
      best_jump = jump;
      best = j + 1;
    }
  }
  return best;
}

Vector median_smooth(const Vector& values, int width) {
  require(width >= 1 && width % 2 == 1, "median_smooth: width must be odd");
  if (width == 1) return values;
  const Index n = values.size();
  const int half = width / 2;
  Vector out(n);
  std::vector<double> window;
  for (Index i = 0; i < n; ++i) {
    window.clear();
    for (int k = -half; k <= half; ++k) {
      Index idx = std::clamp(i + k, Index{0}, n - 1);
      window.push_back(values[idx]);
    }
    std::nth_element(window.begin(), window.begin() + half, window.end());
    out[i] = window[half];
  }
  return out;
}

std::vector<PicardRow> picard_table(const RitzSet& ritz, double lambda,
                                    int smooth_width) {
  Vector abs_a = ritz.r_a.cwiseAbs();
  Vector abs_m = (lambda * ritz.r_m).cwiseAbs();
  Vector abs_total = (ritz.r_a + lambda * ritz.r_m).cwiseAbs();
  abs_a = median_smooth(abs_a, smooth_width);
  abs_m = median_smooth(abs_m, smooth_width);
  abs_total = median_smooth(abs_total, smooth_width);

  std::vector<PicardRow> rows(ritz.m);
  for (int j = 0; j < ritz.m; ++j)
    rows[j] = {j + 1, ritz.theta[j], abs_a[j], abs_m[j], abs_total[j]};
  return rows;
}

Vector ritz_value_drift(const RitzSet& current, const RitzSet& previous) {
  const int common = std::min(current.m, previous.m);
  Vector drift(common);
  for (int j = 0; j < common; ++j) {
    double scale = std::max(std::abs(current.theta[j]), 1e-300);
    drift[j] = std::abs(current.theta[j] - previous.theta[j]) / scale;
  }
  return drift;
}

int picard_cutoff(const RitzSet& ritz, int smooth_width) {
  require(ritz.m >= 3, "picard_cutoff: need at least three Ritz values");
  Vector contrib = median_smooth(ritz.total_contribution().cwiseAbs(), smooth_width);
  Vector ratio(ritz.m);
  for (int j = 0; j < ritz.m; ++j)
    ratio[j] = contrib[j] / ritz.theta_solve(j);
  for (int j = 0; j + 2 < ritz.m; ++j) {
    if (ratio[j + 1] > ratio[j] && ratio[j + 2] > ratio[j + 1]) return j + 1;
  }
  return ritz.m;
}

}  // namespace ritzcg
