#pragma once

#include "mvdepth/depthnet/layers.hpp"
#include "mvdepth/depthnet/tensor.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mvdepth::depthnet {

enum class LayerKind { kConv, kUpsampleBilinear, kConcat, kSigmoidScaled };

std::string_view to_string(LayerKind kind);

/// One node of the encoder-decoder graph. Conv nodes optionally fold in
/// batch normalization and ReLU. Upsample nodes take {source, size_reference}
/// and resize the source to the reference's resolution.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  int kernel = 0;
  int stride = 1;
  int in_channels = 0;
  int out_channels = 0;
  std::vector<std::string> inputs;
  bool has_batchnorm = false;
  bool has_relu = false;
  int res_in = 0;   // log2 downsampling factor of the input
  int res_out = 0;  // log2 downsampling factor of the output
};

struct Rational {
  int num = 1;
  int den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

struct NetworkConfig {
  int n_depth_samples = 64;
  Rational channel_width_scale{1, 1};
  double sigmoid_scale = 2.0;
  BatchNormSettings batchnorm;
};

/// Name of the graph's external input (reference image stacked on the cost
/// volume).
inline constexpr const char* kInputName = "input";

/// Names of the four inverse-depth heads, finest first.
inline constexpr std::array<const char*, 4> kOutputNames = {"disp0_sigmoid", "disp1_sigmoid",
                                                            "disp2_sigmoid", "disp3_sigmoid"};

/// Output resolution is input / 2^s for s = 0..3, so H and W must be
/// multiples of this.
inline constexpr int kSpatialMultiple = 8;

/// Layer list of the encoder-decoder for `config`, topologically ordered.
/// Throws InvalidConfig.
std::vector<LayerSpec> build_layout(const NetworkConfig& config);

/// Channel count after width scaling: max(1, round(c * scale)).
int scale_channels(int channels, const Rational& scale);

template <typename T>
struct ParameterView {
  std::string name;
  std::span<T> value;
  std::span<T> grad;
};

template <typename T>
struct Prediction {
  std::array<Tensor<T>, 4> scales;  // N x 1 x H/2^s x W/2^s inverse depths
};

struct ForwardMode {
  bool training = false;
  bool update_running_stats = false;
};

template <typename T>
struct ForwardRecord;

/// Encoder-decoder depth network with parameters and gradient buffers.
template <typename T>
class NetworkGraph {
 public:
  /// Throws InvalidConfig. Parameters start at zero; call initialize().
  explicit NetworkGraph(const NetworkConfig& config);
  ~NetworkGraph();
  NetworkGraph(NetworkGraph&&) noexcept;
  NetworkGraph& operator=(NetworkGraph&&) noexcept;

  const NetworkConfig& config() const { return config_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const LayerSpec& layer(const std::string& name) const;

  /// Kaiming fan-in normal conv weights, zero biases, unit BN scale.
  void initialize(std::uint64_t seed);

  /// Learnable parameter count (conv weights/biases and BN affine terms).
  std::size_t parameter_count() const;

  std::vector<ParameterView<T>> parameters();
  /// Non-learnable state (BN running statistics).
  std::vector<ParameterView<T>> buffers();
  void zero_grad();

  /// Output shapes for an input of h x w without running the network.
  /// Throws ShapeMismatch.
  std::array<Shape, 4> output_shapes(int h, int w) const;

  /// Runs the graph. Input is N x (N_d + 3) x H x W. When `record` is set,
  /// it receives everything backward() needs. Throws ShapeMismatch.
  Prediction<T> forward(const Tensor<T>& input, ForwardMode mode,
                        ForwardRecord<T>* record = nullptr);

  /// Accumulates parameter gradients given dL/d(output) for each scale.
  void backward(const ForwardRecord<T>& record, const std::array<Tensor<T>, 4>& output_grads);

 private:
  struct ConvState;
  void check_input(const Shape& shape) const;

  NetworkConfig config_;
  std::vector<LayerSpec> layers_;
  std::vector<int> layer_of_output_;  // index of each kOutputNames entry
  std::vector<std::vector<int>> input_index_;  // -1 is the network input
  std::vector<ConvState> conv_;        // parallel to layers_ (unused for non-conv)
};

template <typename T>
struct ForwardRecord {
  Tensor<T> input;
  std::vector<Tensor<T>> outputs;
  std::vector<BatchNormCache<T>> batchnorm;
  ForwardMode mode;
};

extern template class NetworkGraph<float>;
extern template class NetworkGraph<double>;

}  // namespace mvdepth::depthnet
