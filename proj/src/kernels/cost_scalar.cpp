#include "mvdepth/geometry.hpp"
#include "mvdepth/kernels/bilinear.hpp"
#include "mvdepth/kernels/cost_kernels.hpp"

#include <cmath>

namespace mvdepth::kernels {

static_assert(kMinWarpDepth == kMinProjectableDepth);

void warp_cost_row_scalar(const WarpCostRow& a) {
  const double* p = a.homography;
  const double y = static_cast<double>(a.y);
  const double row_x = p[1] * y + p[2];
  const double row_y = p[4] * y + p[5];
  const double row_z = p[7] * y + p[8];
  const std::size_t plane = static_cast<std::size_t>(a.width) * static_cast<std::size_t>(a.height);
  const std::size_t row_offset = static_cast<std::size_t>(a.y) * static_cast<std::size_t>(a.width);
  const double inv_channels = 1.0 / static_cast<double>(a.channels);

  for (int x = 0; x < a.width; ++x) {
    const double xd = static_cast<double>(x);
    const double hz = p[6] * xd + row_z;
    if (!(hz > kMinWarpDepth)) continue;
    const double u = (p[0] * xd + row_x) / hz;
    const double v = (p[3] * xd + row_y) / hz;
    BilinearTap tap;
    if (!bilinear_tap(u, v, a.width, a.height, tap)) continue;

    double ad = 0.0;
    for (int c = 0; c < a.channels; ++c) {
      const float* meas = a.measurement + static_cast<std::size_t>(c) * plane;
      const double sample = bilinear_sample(meas, a.width, tap);
      const double ref = a.reference[static_cast<std::size_t>(c) * plane + row_offset +
                                     static_cast<std::size_t>(x)];
      ad += std::abs(ref - sample);
    }
    a.cost_row[x] += ad * inv_channels;
    a.count_row[x] += 1;
  }
}

void argmin_update_scalar(const ArgminPlane& a) {
  for (std::size_t i = 0; i < a.n; ++i) {
    if (a.counts[i] > 0 && a.cost[i] < a.best_cost[i]) {
      a.best_cost[i] = a.cost[i];
      a.best_index[i] = a.index;
    }
  }
}

}  // namespace mvdepth::kernels
