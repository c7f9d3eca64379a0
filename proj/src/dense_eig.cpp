#include "ritzcg/dense_eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace ritzcg {

namespace {

double offdiag_norm(const Matrix& a) {
  double acc = 0.0;
  for (Index p = 0; p < a.rows(); ++p)
    for (Index q = p + 1; q < a.cols(); ++q) acc += 2.0 * a(p, q) * a(p, q);
  return std::sqrt(acc);
}

void sort_descending(Vector& values, Matrix& vectors) {
  const Index n = values.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return values[i] > values[j]; });
  Vector sorted_values(n);
  Matrix sorted_vectors(vectors.rows(), n);
  for (Index k = 0; k < n; ++k) {
    sorted_values[k] = values[order[k]];
    sorted_vectors.col(k) = vectors.col(order[k]);
  }
  values = sorted_values;
  vectors = sorted_vectors;
}

}  // namespace

DenseSpectrum dense_sym_eig(const Matrix& a) {
  require(a.rows() == a.cols(), "dense_sym_eig: matrix must be square");
  const Index n = a.rows();
  const double fro = a.norm();
  if (fro > 0.0) {
    double sym_defect = (a - a.transpose()).norm() / fro;
    if (sym_defect > 1e-8) throw NotSymmetricError(sym_defect);
  }

  Matrix work = 0.5 * (a + a.transpose());
  Matrix vectors = Matrix::Identity(n, n);
  const double threshold = 1e-12 * fro;
  const int max_sweeps = 50;

  double off = offdiag_norm(work);
  int sweep = 0;
  while (off > threshold && sweep < max_sweeps) {
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        double apq = work(p, q);
        if (std::abs(apq) <= threshold / (n * n + 1.0)) continue;
        double app = work(p, p);
        double aqq = work(q, q);
        double zeta = (aqq - app) / (2.0 * apq);
        double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;

        for (Index k = 0; k < n; ++k) {
          double wkp = work(k, p);
          double wkq = work(k, q);
          work(k, p) = c * wkp - s * wkq;
          work(k, q) = s * wkp + c * wkq;
        }
        for (Index k = 0; k < n; ++k) {
          double wpk = work(p, k);
          double wqk = work(q, k);
          work(p, k) = c * wpk - s * wqk;
          work(q, k) = s * wpk + c * wqk;
        }
        for (Index k = 0; k < n; ++k) {
          double vkp = vectors(k, p);
          double vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
    off = offdiag_norm(work);
    ++sweep;
  }
  if (off > threshold)
    throw ConvergenceError("dense_sym_eig: Jacobi sweeps exhausted", off);

  Vector values = work.diagonal();
  sort_descending(values, vectors);
  return {values, vectors};
}

DenseSpectrum generalized_eig(const Matrix& a, const Matrix& m) {
  require(a.rows() == a.cols() && m.rows() == m.cols(),
          "generalized_eig: matrices must be square");
  require_same_dim(a.rows(), m.rows(), "generalized_eig");

  Matrix lower = cholesky_lower(m);
  // B = L^-1 A L^-T shares the spectrum of the pencil (A, M).
  Matrix b = lower.triangularView<Eigen::Lower>().solve(a);
  b = lower.triangularView<Eigen::Lower>().solve(b.transpose()).transpose();
  DenseSpectrum spec = dense_sym_eig(0.5 * (b + b.transpose()));
  Matrix vectors =
      lower.transpose().triangularView<Eigen::Upper>().solve(spec.vectors);
  return {spec.values, vectors};
}

Vector tsvd_solve(const Matrix& a, const Vector& b, double eps_sigma) {
  require(eps_sigma > 0.0 && eps_sigma < 1.0, "tsvd_solve: eps_sigma must be in (0,1)");
  require_same_dim(a.rows(), b.size(), "tsvd_solve");
  DenseSpectrum spec = dense_sym_eig(a);
  double sigma1 = spec.values[0];
  if (!(sigma1 > 0.0)) throw Error("tsvd_solve: zero operator");
  Vector x = Vector::Zero(b.size());
  for (Index i = 0; i < spec.values.size(); ++i) {
    if (spec.values[i] <= eps_sigma * sigma1) break;
    x += (spec.vectors.col(i).dot(b) / spec.values[i]) * spec.vectors.col(i);
  }
  return x;
}

Matrix cholesky_lower(const Matrix& m) {
  require(m.rows() == m.cols(), "cholesky_lower: matrix must be square");
  const Index n = m.rows();
  Matrix lower = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double diag = m(j, j) - lower.row(j).head(j).squaredNorm();
    if (!(diag > 0.0)) throw NotSpdError(j);
    lower(j, j) = std::sqrt(diag);
    for (Index i = j + 1; i < n; ++i) {
      double sum = m(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j));
      lower(i, j) = sum / lower(j, j);
    }
  }
  return lower;
}

Vector cholesky_solve(const Matrix& lower, const Vector& b) {
  require_same_dim(lower.rows(), b.size(), "cholesky_solve");
  Vector y = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

}  // namespace ritzcg
