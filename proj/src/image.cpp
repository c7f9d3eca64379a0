#include "ritzcg/image.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ritzcg {

std::pair<Image, Image> gradient(const Image& img) {
  const Index rows = img.rows();
  const Index cols = img.cols();
  require(rows >= 2 && cols >= 2, "gradient: image must be at least 2x2");
  Image jx(rows, cols);
  Image jy(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    for (Index x = 0; x < cols; ++x) {
      if (x == 0)
        jx(y, x) = img(y, 1) - img(y, 0);
      else if (x == cols - 1)
        jx(y, x) = img(y, cols - 1) - img(y, cols - 2);
      else
        jx(y, x) = 0.5 * (img(y, x + 1) - img(y, x - 1));

      if (y == 0)
        jy(y, x) = img(1, x) - img(0, x);
      else if (y == rows - 1)
        jy(y, x) = img(rows - 1, x) - img(rows - 2, x);
      else
        jy(y, x) = 0.5 * (img(y + 1, x) - img(y - 1, x));
    }
  }
  return {jx, jy};
}

Image warp(const Image& img, const Image& u_x, const Image& u_y) {
  require_same_dim(img.rows(), u_x.rows(), "warp");
  require_same_dim(img.cols(), u_x.cols(), "warp");
  require_same_dim(img.rows(), u_y.rows(), "warp");
  require(img.rows() >= 2 && img.cols() >= 2, "warp: image must be at least 2x2");
  const Index rows = img.rows();
  const Index cols = img.cols();
  Image out(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    for (Index x = 0; x < cols; ++x) {
      double sx = std::clamp(x + u_x(y, x), 0.0, double(cols - 1));
      double sy = std::clamp(y + u_y(y, x), 0.0, double(rows - 1));
      Index x0 = std::min(static_cast<Index>(sx), cols - 2 >= 0 ? cols - 2 : 0);
      Index y0 = std::min(static_cast<Index>(sy), rows - 2 >= 0 ? rows - 2 : 0);
      double fx = sx - x0;
      double fy = sy - y0;
      out(y, x) = (1 - fy) * ((1 - fx) * img(y0, x0) + fx * img(y0, x0 + 1)) +
                  fy * ((1 - fx) * img(y0 + 1, x0) + fx * img(y0 + 1, x0 + 1));
    }
  }
  return out;
}

Image neg_laplacian(const Image& u) {
  const Index rows = u.rows();
  const Index cols = u.cols();
  Image out(rows, cols);
  auto cy = [&](Index y) { return std::clamp(y, Index{0}, rows - 1); };
  auto cx = [&](Index x) { return std::clamp(x, Index{0}, cols - 1); };
  for (Index y = 0; y < rows; ++y)
    for (Index x = 0; x < cols; ++x)
      out(y, x) = 4.0 * u(y, x) - u(cy(y - 1), x) - u(cy(y + 1), x) -
                  u(y, cx(x - 1)) - u(y, cx(x + 1));
  return out;
}

Image median_filter(const Image& field, int width) {
  require(width >= 1 && width % 2 == 1, "median_filter: width must be odd");
  if (width == 1) return field;
  const Index rows = field.rows();
  const Index cols = field.cols();
  const int half = width / 2;
  Image out(rows, cols);
  std::vector<double> window;
  window.reserve(static_cast<size_t>(width) * width);
  for (Index y = 0; y < rows; ++y) {
    for (Index x = 0; x < cols; ++x) {
      window.clear();
      for (int dy = -half; dy <= half; ++dy)
        for (int dx = -half; dx <= half; ++dx)
          window.push_back(field(std::clamp(y + dy, Index{0}, rows - 1),
                                 std::clamp(x + dx, Index{0}, cols - 1)));
      auto mid = window.begin() + window.size() / 2;
      std::nth_element(window.begin(), mid, window.end());
      out(y, x) = *mid;
    }
  }
  return out;
}

Image strain_xx(const Image& u_x) {
  return gradient(u_x).first;
}

Image box_downsample(const Image& img) {
  const Index rows = (img.rows() + 1) / 2;
  const Index cols = (img.cols() + 1) / 2;
  Image out(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    for (Index x = 0; x < cols; ++x) {
      double acc = 0.0;
      int count = 0;
      for (Index dy = 0; dy < 2; ++dy) {
        for (Index dx = 0; dx < 2; ++dx) {
          Index sy = 2 * y + dy;
          Index sx = 2 * x + dx;
          if (sy < img.rows() && sx < img.cols()) {
            acc += img(sy, sx);
            ++count;
          }
        }
      }
      out(y, x) = acc / count;
    }
  }
  return out;
}

Image upsample_bilinear(const Image& img, Index rows, Index cols) {
  require(img.rows() >= 2 && img.cols() >= 2,
          "upsample_bilinear: image must be at least 2x2");
  Image out(rows, cols);
  const double sy = double(img.rows()) / rows;
  const double sx = double(img.cols()) / cols;
  for (Index y = 0; y < rows; ++y) {
    for (Index x = 0; x < cols; ++x) {
      double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(img.rows() - 1));
      double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(img.cols() - 1));
      Index y0 = std::min(static_cast<Index>(src_y), img.rows() - 2 >= 0 ? img.rows() - 2 : 0);
      Index x0 = std::min(static_cast<Index>(src_x), img.cols() - 2 >= 0 ? img.cols() - 2 : 0);
      double fy = src_y - y0;
      double fx = src_x - x0;
      out(y, x) = (1 - fy) * ((1 - fx) * img(y0, x0) + fx * img(y0, x0 + 1)) +
                  fy * ((1 - fx) * img(y0 + 1, x0) + fx * img(y0 + 1, x0 + 1));
    }
  }
  return out;
}

Image make_speckle(Index rows, Index cols, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed, 0x737065636bULL);
  Image img(rows, cols);
  for (Index y = 0; y < rows; ++y)
    for (Index x = 0; x < cols; ++x) img(y, x) = rng.uniform();

  // A few box-blur passes give blob sizes of a few pixels, enough texture
  // for gradients everywhere.
  for (int pass = 0; pass < 2; ++pass) {
    Image blurred(rows, cols);
    for (Index y = 0; y < rows; ++y) {
      for (Index x = 0; x < cols; ++x) {
        double acc = 0.0;
        int count = 0;
        for (Index dy = -1; dy <= 1; ++dy) {
          for (Index dx = -1; dx <= 1; ++dx) {
            Index sy = y + dy;
            Index sx = x + dx;
            if (sy >= 0 && sy < rows && sx >= 0 && sx < cols) {
              acc += img(sy, sx);
              ++count;
            }
          }
        }
        blurred(y, x) = acc / count;
      }
    }
    img = blurred;
  }

  double min_v = img.minCoeff();
  double max_v = img.maxCoeff();
  require(max_v > min_v, "make_speckle: degenerate field");
  return (lo + (hi - lo) * (img.array() - min_v) / (max_v - min_v)).matrix();
}

}  // namespace ritzcg
