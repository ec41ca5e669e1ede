#pragma once

// Inner loops of plane-sweep cost accumulation and winner-take-all search.
// Each entry point has a scalar reference (`*_scalar`) and, when built for
// x86-64, an AVX2 variant (`*_avx2`). The unsuffixed functions dispatch on
// simd::active_level(). Variants are bitwise-equivalent: they evaluate the
// same expression trees without fused multiply-add.

#include <cstddef>
#include <cstdint>

namespace mvdepth::kernels {

/// Pixels warped this far outside the image are still clamped onto the
/// border instead of rejected; covers rounding in lambda(P u).
inline constexpr double kSampleBoundsTolerance = 1e-9;

/// Warped points at or below this depth in the measurement camera are
/// invalid (matches geometry's kMinProjectableDepth).
inline constexpr double kMinWarpDepth = 1e-9;

/// One reference row warped into one measurement image at one depth.
struct WarpCostRow {
  const double* homography;     // row-major 3x3 warp matrix
  int y;                        // reference row
  int width;
  int height;
  int channels;
  const float* reference;       // planar, channels x height x width
  const float* measurement;     // planar, same shape
  double* cost_row;             // width accumulators, += per-pixel AD
  std::uint16_t* count_row;     // width contributor counters
};

void warp_cost_row_scalar(const WarpCostRow& args);
void warp_cost_row_avx2(const WarpCostRow& args);
void warp_cost_row(const WarpCostRow& args);

/// For every pixel i with counts[i] > 0 and cost[i] < best_cost[i], records
/// (cost[i], index). Strict comparison keeps the smallest index on ties when
/// planes are visited in ascending order.
struct ArgminPlane {
  const double* cost;
  const std::uint16_t* counts;
  std::size_t n;
  std::int32_t index;
  double* best_cost;
  std::int32_t* best_index;
};

void argmin_update_scalar(const ArgminPlane& args);
void argmin_update_avx2(const ArgminPlane& args);
void argmin_update(const ArgminPlane& args);

}  // namespace mvdepth::kernels
