#pragma once

#include "mvdepth/depthnet/network.hpp"
#include "mvdepth/image.hpp"

#include <array>
#include <span>

namespace mvdepth::depthnet {

/// Ground truth at the four output scales, finest first.
using GtPyramid = std::array<DepthMap, 4>;

/// Mean of the valid inverse depths in each 2^s x 2^s block (partial blocks
/// at the border included). A block without valid pixels is invalid.
DepthMap downsample_gt(const DepthMap& gt, int scale);

GtPyramid gt_pyramid(const DepthMap& gt);

/// Multi-scale L1 loss on inverse depth, averaged over the batch:
///   L = 1/N sum_n sum_s 1/n_s sum_i |xi_si - 1/d_si|
/// where n_s counts valid ground-truth pixels of sample n at scale s. Scales
/// without valid pixels contribute nothing. When `grads` is set it receives
/// dL/dxi for each scale. Throws ShapeMismatch.
template <typename T>
double multiscale_l1_loss(const Prediction<T>& prediction, std::span<const GtPyramid> gt,
                          std::array<Tensor<T>, 4>* grads = nullptr);

/// Mean |xi - 1/d| over valid full-resolution pixels of the whole batch.
template <typename T>
double l1_inverse_error(const Tensor<T>& finest, std::span<const GtPyramid> gt);

}  // namespace mvdepth::depthnet
