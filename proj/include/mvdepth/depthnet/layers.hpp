#pragma once

// Layer primitives of the depth network: convolution (im2col + packed
// GEMM), batch normalization, bilinear upsampling. Backward functions
// accumulate into their gradient outputs.

#include "mvdepth/depthnet/tensor.hpp"

#include <vector>

namespace mvdepth::depthnet {

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int pad = 1;
};

/// Output extent of a zero-padded convolution: floor((in + 2p - k) / s) + 1.
int conv_output_size(int in, const ConvGeometry& g);

/// y = conv(x, weight). weight is [out][in][k][k]; y is resized.
template <typename T>
void conv2d_forward(const Tensor<T>& x, const T* weight, int out_channels, const ConvGeometry& g,
                    Tensor<T>& y);

/// dweight += dL/dweight; dx += dL/dx when dx is non-null.
template <typename T>
void conv2d_backward(const Tensor<T>& x, const T* weight, int out_channels, const ConvGeometry& g,
                     const Tensor<T>& dy, T* dweight, Tensor<T>* dx);

/// Direct seven-loop convolution; the oracle for conv2d_forward.
template <typename T>
void conv2d_reference(const Tensor<T>& x, const T* weight, int out_channels,
                      const ConvGeometry& g, Tensor<T>& y);

template <typename T>
struct BatchNormCache {
  bool training = false;
  std::vector<double> inv_std;  // per channel
  Tensor<T> xhat;
};

struct BatchNormSettings {
  double epsilon = 1e-5;
  double momentum = 0.1;
};

/// Training mode normalizes with batch statistics (biased variance) and, if
/// `update_running` is set, folds them into the running estimates (unbiased
/// variance). Inference mode uses the running estimates.
template <typename T>
void batchnorm_forward(const Tensor<T>& z, const T* gamma, const T* beta, T* running_mean,
                       T* running_var, bool training, bool update_running,
                       const BatchNormSettings& settings, Tensor<T>& y, BatchNormCache<T>* cache);

template <typename T>
void batchnorm_backward(const Tensor<T>& dy, const T* gamma, const BatchNormCache<T>& cache,
                        T* dgamma, T* dbeta, Tensor<T>& dz);

/// Bilinear resize with the align-corners-false convention:
/// src = (dst + 0.5) * in / out - 0.5, clamped at 0.
template <typename T>
void upsample_bilinear_forward(const Tensor<T>& x, int out_h, int out_w, Tensor<T>& y);

template <typename T>
void upsample_bilinear_backward(const Tensor<T>& dy, Tensor<T>& dx);

}  // namespace mvdepth::depthnet
