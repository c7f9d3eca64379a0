#include "ritzcg/augmentation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ritzcg/dense_eig.hpp"

namespace ritzcg {

namespace {

Matrix apply_columns(const LinearMap& a, const Matrix& c) {
  Matrix ac(c.rows(), c.cols());
  for (Index j = 0; j < c.cols(); ++j) ac.col(j) = a.apply(c.col(j));
  return ac;
}

Matrix drop_column(const Matrix& m, Index bad) {
  Matrix reduced(m.rows(), m.cols() - 1);
  Index out = 0;
  for (Index j = 0; j < m.cols(); ++j)
    if (j != bad) reduced.col(out++) = m.col(j);
  return reduced;
}

}  // namespace

AugmentationBasis AugmentationBasis::build(const LinearMap& a, const Matrix& c,
                                           std::vector<BasisLabel> labels) {
  AugmentationBasis basis;
  if (c.cols() == 0) {
    basis.c_ = Matrix(a.dim(), 0);
    basis.ac_ = Matrix(a.dim(), 0);
    return basis;
  }
  require_same_dim(a.dim(), c.rows(), "AugmentationBasis::build");
  require(labels.size() == static_cast<size_t>(c.cols()),
          "AugmentationBasis::build: one label per column");
  basis.c_ = c;
  basis.ac_ = apply_columns(a, c);
  Matrix gram = c.transpose() * basis.ac_;
  gram = 0.5 * (gram + gram.transpose());
  try {
    basis.gram_lower_ = cholesky_lower(gram);
  } catch (const NotSpdError& err) {
    throw Error("AugmentationBasis::build: C^T A C singular, column " +
                std::to_string(err.pivot()) + " depends on the previous ones");
  }
  basis.labels_ = std::move(labels);
  return basis;
}

AugmentationBasis AugmentationBasis::build_dropping(const LinearMap& a, const Matrix& c,
                                                    std::vector<BasisLabel> labels,
                                                    std::vector<int>* dropped) {
  return build_with_ac(c, apply_columns(a, c), std::move(labels), dropped);
}

AugmentationBasis AugmentationBasis::build_with_ac(const Matrix& c, const Matrix& ac,
                                                   std::vector<BasisLabel> labels,
                                                   std::vector<int>* dropped) {
  require_same_dim(c.rows(), ac.rows(), "AugmentationBasis::build_with_ac");
  require_same_dim(c.cols(), ac.cols(), "AugmentationBasis::build_with_ac");
  require(labels.size() == static_cast<size_t>(c.cols()),
          "AugmentationBasis::build_with_ac: one label per column");

  Matrix kept = c;
  Matrix kept_ac = ac;
  std::vector<BasisLabel> kept_labels = labels;
  std::vector<int> kept_origin(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) kept_origin[i] = static_cast<int>(i);

  AugmentationBasis basis;
  while (true) {
    if (kept.cols() == 0) {
      basis.c_ = Matrix(c.rows(), 0);
      basis.ac_ = Matrix(c.rows(), 0);
      basis.labels_.clear();
      return basis;
    }
    Matrix gram = kept.transpose() * kept_ac;
    gram = 0.5 * (gram + gram.transpose());
    try {
      basis.gram_lower_ = cholesky_lower(gram);
      break;
    } catch (const NotSpdError& err) {
      Index bad = err.pivot();
      if (dropped) dropped->push_back(kept_origin[bad]);
      kept = drop_column(kept, bad);
      kept_ac = drop_column(kept_ac, bad);
      kept_labels.erase(kept_labels.begin() + bad);
      kept_origin.erase(kept_origin.begin() + bad);
    }
  }
  basis.c_ = std::move(kept);
  basis.ac_ = std::move(kept_ac);
  basis.labels_ = std::move(kept_labels);
  return basis;
}

std::pair<Vector, Vector> AugmentationBasis::init(const Vector& x00, const Vector& b,
                                                  const LinearMap& a) const {
  Vector r00 = b - a.apply(x00);
  if (empty()) return {x00, r00};
  Vector y = solve_gram(c_.transpose() * r00);
  Vector x0 = x00 + c_ * y;
  Vector r0 = r00 - ac_ * y;
  return {x0, r0};
}

Vector AugmentationBasis::solve_gram(const Vector& rhs) const {
  return cholesky_solve(gram_lower_, rhs);
}

Vector AugmentationBasis::apply(const Vector& v) const {
  if (empty()) return v;
  return v - c_ * solve_gram(ac_.transpose() * v);
}

Vector AugmentationBasis::apply_transpose(const Vector& v) const {
  if (empty()) return v;
  return v - ac_ * solve_gram(c_.transpose() * v);
}

KernelCheckReport kernel_basis_check(const Matrix& c0, const LinearMap& m, double tol) {
  KernelCheckReport report;

  // Power-iteration estimate of ||M||.
  Rng rng(0x6b65726eULL);
  Vector probe = rng.normal_vector(m.dim());
  probe.normalize();
  double norm_estimate = 0.0;
  for (int it = 0; it < 12; ++it) {
    Vector next = m.apply(probe);
    norm_estimate = next.norm();
    if (norm_estimate <= 0.0) break;
    probe = next / norm_estimate;
  }
  report.operator_norm_estimate = norm_estimate;

  for (Index j = 0; j < c0.cols(); ++j) {
    double residual = m.apply(c0.col(j)).norm();
    report.column_residuals.push_back(residual);
    double scale = std::max(norm_estimate, 1e-300) * std::max(c0.col(j).norm(), 1e-300);
    if (residual > tol * scale) report.violating_columns.push_back(static_cast<int>(j));
  }
  return report;
}

int default_keep(int m) { return static_cast<int>(std::ceil(0.85 * m)); }

AugmentationBasis recycle(const AugmentationBasis& basis, const LinearMap& a,
                          const RitzSet& ritz, const Matrix& av, int keep,
                          std::vector<int>* dropped) {
  require(keep >= 0, "recycle: keep must be non-negative");
  if (keep == 0) return basis;
  if (ritz.degraded) keep = std::min(keep, ritz.valid_count);

  auto [v_normalized, av_normalized] = a_normalize(ritz, av);
  keep = std::min<int>(keep, static_cast<int>(v_normalized.cols()));

  // The appended images come from the q-vector recurrence, so concatenation
  // costs no operator applications.
  Matrix c(a.dim(), basis.count() + keep);
  Matrix ac(a.dim(), basis.count() + keep);
  std::vector<BasisLabel> labels = basis.labels();
  if (basis.count() > 0) {
    c.leftCols(basis.count()) = basis.c();
    ac.leftCols(basis.count()) = basis.ac();
  }
  for (int j = 0; j < keep; ++j) {
    c.col(basis.count() + j) = v_normalized.col(j);
    ac.col(basis.count() + j) = av_normalized.col(j);
    labels.push_back(BasisLabel::Ritz);
  }
  return AugmentationBasis::build_with_ac(c, ac, labels, dropped);
}

void save_basis(const std::string& path, const AugmentationBasis& basis) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "save_basis: cannot open " + path);
  const char magic[8] = {'r', 'c', 'g', 'b', 'a', 's', '1', '\n'};
  out.write(magic, sizeof(magic));
  std::int64_t dim = basis.dim();
  std::int64_t count = basis.count();
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (int j = 0; j < count; ++j) {
    std::uint8_t label = static_cast<std::uint8_t>(basis.labels()[j]);
    out.write(reinterpret_cast<const char*>(&label), sizeof(label));
  }
  // Column-major doubles.
  out.write(reinterpret_cast<const char*>(basis.c().data()),
            static_cast<std::streamsize>(sizeof(double) * dim * count));
  require(out.good(), "save_basis: write failed for " + path);
}

AugmentationBasis load_basis(const std::string& path, const LinearMap& a) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "load_basis: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  require(in.good() && std::string(magic, 7) == "rcgbas1", "load_basis: bad header");
  std::int64_t dim = 0, count = 0;
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  require(in.good() && dim == a.dim(), "load_basis: dimension mismatch");
  std::vector<BasisLabel> labels(count);
  for (std::int64_t j = 0; j < count; ++j) {
    std::uint8_t label = 0;
    in.read(reinterpret_cast<char*>(&label), sizeof(label));
    labels[j] = static_cast<BasisLabel>(label);
  }
  Matrix c(dim, count);
  in.read(reinterpret_cast<char*>(c.data()),
          static_cast<std::streamsize>(sizeof(double) * dim * count));
  require(in.good(), "load_basis: truncated file");
  return AugmentationBasis::build(a, c, labels);
}

}  // namespace ritzcg
