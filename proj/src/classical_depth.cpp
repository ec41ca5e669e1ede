#include "mvdepth/classical_depth.hpp"

#include "mvdepth/kernels/cost_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mvdepth {

ArgminResult argmin_depth(const CostVolume& volume) {
  const std::size_t plane = volume.plane_size();
  std::vector<double> best(plane, std::numeric_limits<double>::infinity());
  ArgminResult out{Grid<std::int32_t>(volume.width, volume.height, -1),
                   Mask(volume.width, volume.height, 0)};
  for (std::size_t d = 0; d < volume.depth_count(); ++d) {
    kernels::argmin_update({volume.plane(d).data(), volume.count_plane(d).data(), plane,
                            static_cast<std::int32_t>(d), best.data(), out.indices.data()});
  }
  for (std::size_t i = 0; i < plane; ++i) out.validity[i] = out.indices[i] >= 0 ? 1 : 0;
  return out;
}

double parabola_offset(double prev, double center, double next) {
  const double curvature = prev + next - 2.0 * center;
  if (!(curvature > 0.0)) return 0.0;
  const double offset = (prev - next) / (2.0 * curvature);
  return std::clamp(offset, -0.5, 0.5);
}

DepthMap subsample_refine(const CostVolume& volume, const ArgminResult& argmin) {
  const DepthHypotheses& hyp = volume.hypotheses;
  const std::size_t n = hyp.size();
  const double inv_lo = hyp.inverse_depths().front();
  const double inv_hi = hyp.inverse_depths().back();
  DepthMap out(volume.width, volume.height);
  for (int y = 0; y < volume.height; ++y) {
    for (int x = 0; x < volume.width; ++x) {
      if (!argmin.validity(x, y)) continue;
      const auto i = static_cast<std::size_t>(argmin.indices(x, y));
      double inv = hyp.inverse_depth(i);
      if (i > 0 && i + 1 < n && volume.count(i - 1, x, y) > 0 && volume.count(i + 1, x, y) > 0) {
        const double offset = parabola_offset(volume.cost(i - 1, x, y), volume.cost(i, x, y),
                                              volume.cost(i + 1, x, y));
        inv = std::clamp(inv + offset * hyp.step(), inv_lo, inv_hi);
      }
      out.set(x, y, std::clamp(1.0 / inv, hyp.d_min(), hyp.d_max()));
    }
  }
  return out;
}

DepthMap extract_depth(const CostVolume& volume, bool refine) {
  const ArgminResult argmin = argmin_depth(volume);
  if (refine) return subsample_refine(volume, argmin);
  DepthMap out(volume.width, volume.height);
  for (int y = 0; y < volume.height; ++y) {
    for (int x = 0; x < volume.width; ++x) {
      if (argmin.validity(x, y)) {
        const double inv =
            volume.hypotheses.inverse_depth(static_cast<std::size_t>(argmin.indices(x, y)));
        out.set(x, y, std::clamp(1.0 / inv, volume.hypotheses.d_min(), volume.hypotheses.d_max()));
      }
    }
  }
  return out;
}

}  // namespace mvdepth
