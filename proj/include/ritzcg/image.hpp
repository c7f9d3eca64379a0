#pragma once

#include <utility>

#include "ritzcg/rng.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

/// Gray-level image or pixel field: rows = height (y), cols = width (x).
using Image = Matrix;

/// Central differences in the interior, one-sided at the borders.
std::pair<Image, Image> gradient(const Image& img);  // (J_x, J_y)

/// Bilinear sampling of img at (x + u_x, y + u_y); out-of-domain coordinates
/// clamp to the nearest edge pixel.
Image warp(const Image& img, const Image& u_x, const Image& u_y);

/// Negative 5-point Laplacian with reflecting borders (clamped neighbors),
/// positive semi-definite with the constants as kernel.
Image neg_laplacian(const Image& u);

/// Per-pixel median over a width x width window with edge replication.
Image median_filter(const Image& field, int width);

/// Central-difference du_x/dx.
Image strain_xx(const Image& u_x);

/// 2x box-filter downsampling; odd trailing rows/columns average what exists.
Image box_downsample(const Image& img);

/// Bilinear resize to the target shape (values are not rescaled).
Image upsample_bilinear(const Image& img, Index rows, Index cols);

/// Column-major flattening helpers for stacked (u_x, u_y) flow vectors.
inline Vector stack_fields(const Image& a, const Image& b) {
  Vector v(a.size() + b.size());
  v.head(a.size()) = Eigen::Map<const Vector>(a.data(), a.size());
  v.tail(b.size()) = Eigen::Map<const Vector>(b.data(), b.size());
  return v;
}

inline std::pair<Image, Image> unstack_fields(const Vector& v, Index rows, Index cols) {
  const Index n = rows * cols;
  require_same_dim(2 * n, v.size(), "unstack_fields");
  Image a = Eigen::Map<const Matrix>(v.data(), rows, cols);
  Image b = Eigen::Map<const Matrix>(v.data() + n, rows, cols);
  return {a, b};
}

/// Deterministic synthetic speckle: smoothed white noise stretched to the
/// given gray range. Suitable for flow benchmarks.
Image make_speckle(Index rows, Index cols, std::uint64_t seed, double lo = 10.0,
                   double hi = 245.0);

}  // namespace ritzcg
