#pragma once

#include <functional>
#include <memory>
#include <utility>

#include "ritzcg/rng.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

enum class MapKind { Dense, Diagonal, ShiftedSum, MatrixFree };

/**
 * Symmetric linear operator with an apply-to-vector action.
 *
 * Value type: copies share the underlying state. Applications are pure with
 * respect to map state and safe to invoke from multiple threads.
 */
class LinearMap {
 public:
  using ApplyFn = std::function<Vector(const Vector&)>;

  LinearMap() = default;
  LinearMap(Index dim, MapKind kind, ApplyFn apply)
      : dim_(dim), kind_(kind), apply_(std::move(apply)) {}

  Index dim() const { return dim_; }
  MapKind kind() const { return kind_; }
  bool valid() const { return static_cast<bool>(apply_); }

  Vector apply(const Vector& x) const {
    require_same_dim(dim_, x.size(), "LinearMap::apply");
    Vector y = apply_(x);
    if (!all_finite(y)) throw Error("LinearMap::apply produced non-finite values");
    return y;
  }

  Vector operator()(const Vector& x) const { return apply(x); }

 private:
  Index dim_ = 0;
  MapKind kind_ = MapKind::MatrixFree;
  ApplyFn apply_;
};

inline LinearMap dense_map(Matrix a) {
  auto held = std::make_shared<Matrix>(std::move(a));
  require(held->rows() == held->cols(), "dense_map: matrix must be square");
  Index n = held->rows();
  return LinearMap(n, MapKind::Dense, [held](const Vector& x) -> Vector { return *held * x; });
}

inline LinearMap diagonal_map(Vector d) {
  auto held = std::make_shared<Vector>(std::move(d));
  Index n = held->size();
  return LinearMap(n, MapKind::Diagonal,
                   [held](const Vector& x) -> Vector { return held->cwiseProduct(x); });
}

inline LinearMap identity_map(Index n) {
  return LinearMap(n, MapKind::Diagonal, [](const Vector& x) -> Vector { return x; });
}

inline LinearMap matrix_free_map(Index n, LinearMap::ApplyFn f) {
  return LinearMap(n, MapKind::MatrixFree, std::move(f));
}

/// v -> A v + lambda * M v, without materializing the sum.
inline LinearMap shifted_map(const LinearMap& a, const LinearMap& m, double lambda) {
  require_same_dim(a.dim(), m.dim(), "shifted_map");
  require(lambda >= 0.0, "shifted_map: lambda must be non-negative");
  if (lambda == 0.0) {
    LinearMap base = a;
    return LinearMap(a.dim(), MapKind::ShiftedSum,
                     [base](const Vector& x) -> Vector { return base.apply(x); });
  }
  LinearMap ca = a, cm = m;
  return LinearMap(a.dim(), MapKind::ShiftedSum, [ca, cm, lambda](const Vector& x) -> Vector {
    return ca.apply(x) + lambda * cm.apply(x);
  });
}

/// Applies the map to every canonical basis vector. For tests and baselines.
inline Matrix materialize(const LinearMap& a) {
  Matrix out(a.dim(), a.dim());
  Vector e = Vector::Zero(a.dim());
  for (Index j = 0; j < a.dim(); ++j) {
    e[j] = 1.0;
    out.col(j) = a.apply(e);
    e[j] = 0.0;
  }
  return out;
}

struct ProbeReport {
  double max_linearity_defect = 0.0;
  double max_symmetry_defect = 0.0;
  bool pass(double tol = 1e-10) const {
    return max_linearity_defect <= tol && max_symmetry_defect <= tol;
  }
};

/// Statistical check of linearity and symmetry on random probes.
inline ProbeReport probe_map(const LinearMap& a, int n_probes = 10, std::uint64_t seed = 0) {
  Rng rng(seed, 0x70726f6265ULL);
  ProbeReport report;
  for (int p = 0; p < n_probes; ++p) {
    Vector x = rng.normal_vector(a.dim());
    Vector y = rng.normal_vector(a.dim());
    double ca = rng.uniform(-2.0, 2.0);
    double cb = rng.uniform(-2.0, 2.0);
    Vector ax = a.apply(x);
    Vector ay = a.apply(y);
    Vector combined = a.apply(ca * x + cb * y);
    double scale = std::max({ax.norm(), ay.norm(), combined.norm(), 1e-30});
    report.max_linearity_defect = std::max(
        report.max_linearity_defect, (combined - ca * ax - cb * ay).norm() / scale);
    double sym = std::abs(ax.dot(y) - x.dot(ay)) / std::max(std::abs(ax.dot(y)), 1e-30);
    report.max_symmetry_defect = std::max(report.max_symmetry_defect, sym);
  }
  return report;
}

}  // namespace ritzcg
