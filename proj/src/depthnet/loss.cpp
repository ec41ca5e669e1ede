#include "mvdepth/depthnet/loss.hpp"

#include "mvdepth/errors.hpp"

#include <cmath>

namespace mvdepth::depthnet {

DepthMap downsample_gt(const DepthMap& gt, int scale) {
  if (scale < 0 || scale > 3) throw InvalidConfig("ground-truth scale must be in 0..3");
  if (scale == 0) return gt;
  const int block = 1 << scale;
  const int w = (gt.width() + block - 1) / block;
  const int h = (gt.height() + block - 1) / block;
  DepthMap out(w, h);
  for (int by = 0; by < h; ++by) {
    for (int bx = 0; bx < w; ++bx) {
      double sum = 0.0;
      int n = 0;
      for (int y = by * block; y < std::min(gt.height(), (by + 1) * block); ++y) {
        for (int x = bx * block; x < std::min(gt.width(), (bx + 1) * block); ++x) {
          if (!gt.valid(x, y)) continue;
          sum += 1.0 / gt.depths(x, y);
          ++n;
        }
      }
      if (n > 0) out.set(bx, by, 1.0 / (sum / n));
    }
  }
  return out;
}

GtPyramid gt_pyramid(const DepthMap& gt) {
  return {downsample_gt(gt, 0), downsample_gt(gt, 1), downsample_gt(gt, 2), downsample_gt(gt, 3)};
}

template <typename T>
double multiscale_l1_loss(const Prediction<T>& prediction, std::span<const GtPyramid> gt,
                          std::array<Tensor<T>, 4>* grads) {
  const int batch = prediction.scales[0].n();
  if (static_cast<std::size_t>(batch) != gt.size()) {
    throw ShapeMismatch("batch size differs from ground-truth count");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < 4; ++s) {
    const Tensor<T>& xi = prediction.scales[s];
    if (grads) (*grads)[s] = Tensor<T>(xi.shape());
    for (int n = 0; n < batch; ++n) {
      const DepthMap& d = gt[static_cast<std::size_t>(n)][s];
      if (d.width() != xi.w() || d.height() != xi.h() || xi.c() != 1) {
        throw ShapeMismatch("ground truth resolution differs from prediction at scale " +
                            std::to_string(s));
      }
      const std::size_t valid = d.count_valid();
      if (valid == 0) continue;
      const T* p = xi.channel(n, 0);
      double sum = 0.0;
      for (std::size_t i = 0; i < d.depths.size(); ++i) {
        if (d.validity[i]) sum += std::abs(static_cast<double>(p[i]) - 1.0 / d.depths[i]);
      }
      const double weight = 1.0 / (static_cast<double>(valid) * batch);
      total += sum * weight;
      if (grads) {
        T* g = (*grads)[s].channel(n, 0);
        for (std::size_t i = 0; i < d.depths.size(); ++i) {
          if (!d.validity[i]) continue;
          const double diff = static_cast<double>(p[i]) - 1.0 / d.depths[i];
          const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
          g[i] = static_cast<T>(sign * weight);
        }
      }
    }
  }
  return total;
}

template <typename T>
double l1_inverse_error(const Tensor<T>& finest, std::span<const GtPyramid> gt) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int b = 0; b < finest.n(); ++b) {
    const DepthMap& d = gt[static_cast<std::size_t>(b)][0];
    if (d.width() != finest.w() || d.height() != finest.h()) {
      throw ShapeMismatch("ground truth resolution differs from prediction");
    }
    const T* p = finest.channel(b, 0);
    for (std::size_t i = 0; i < d.depths.size(); ++i) {
      if (!d.validity[i]) continue;
      sum += std::abs(static_cast<double>(p[i]) - 1.0 / d.depths[i]);
      ++n;
    }
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

template double multiscale_l1_loss<float>(const Prediction<float>&, std::span<const GtPyramid>,
                                          std::array<Tensor<float>, 4>*);
template double multiscale_l1_loss<double>(const Prediction<double>&, std::span<const GtPyramid>,
                                           std::array<Tensor<double>, 4>*);
template double l1_inverse_error<float>(const Tensor<float>&, std::span<const GtPyramid>);
template double l1_inverse_error<double>(const Tensor<double>&, std::span<const GtPyramid>);

}  // namespace mvdepth::depthnet
