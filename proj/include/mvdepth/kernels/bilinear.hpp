#pragma once

#include "mvdepth/kernels/cost_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace mvdepth::kernels {

/// Integer corners and fractional weights of a bilinear lookup.
struct BilinearTap {
  int x0, x1, y0, y1;
  double fx, fy;
};

/// Returns false when (u, v) lies outside [0, W-1] x [0, H-1] beyond
/// kSampleBoundsTolerance (NaN included).
inline bool bilinear_tap(double u, double v, int width, int height, BilinearTap& tap) {
  const double max_u = static_cast<double>(width - 1);
  const double max_v = static_cast<double>(height - 1);
  if (!(u >= -kSampleBoundsTolerance && u <= max_u + kSampleBoundsTolerance &&
        v >= -kSampleBoundsTolerance && v <= max_v + kSampleBoundsTolerance)) {
    return false;
  }
  const double uc = std::min(std::max(u, 0.0), max_u);
  const double vc = std::min(std::max(v, 0.0), max_v);
  const double x0 = std::min(std::floor(uc), std::max(max_u - 1.0, 0.0));
  const double y0 = std::min(std::floor(vc), std::max(max_v - 1.0, 0.0));
  tap.x0 = static_cast<int>(x0);
  tap.y0 = static_cast<int>(y0);
  tap.x1 = std::min(tap.x0 + 1, width - 1);
  tap.y1 = std::min(tap.y0 + 1, height - 1);
  tap.fx = uc - x0;
  tap.fy = vc - y0;
  return true;
}

/// Interpolates one plane; the expression order is shared with the SIMD
/// kernels.
template <typename T>
inline double bilinear_sample(const T* plane, int width, const BilinearTap& t) {
  const std::size_t w = static_cast<std::size_t>(width);
  const double i00 = plane[static_cast<std::size_t>(t.y0) * w + static_cast<std::size_t>(t.x0)];
  const double i01 = plane[static_cast<std::size_t>(t.y0) * w + static_cast<std::size_t>(t.x1)];
  const double i10 = plane[static_cast<std::size_t>(t.y1) * w + static_cast<std::size_t>(t.x0)];
  const double i11 = plane[static_cast<std::size_t>(t.y1) * w + static_cast<std::size_t>(t.x1)];
  const double top = i00 + (i01 - i00) * t.fx;
  const double bottom = i10 + (i11 - i10) * t.fx;
  return top + (bottom - top) * t.fy;
}

}  // namespace mvdepth::kernels
