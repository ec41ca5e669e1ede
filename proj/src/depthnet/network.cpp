#include "mvdepth/depthnet/network.hpp"

#include "mvdepth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace mvdepth::depthnet {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kUpsampleBilinear: return "upsample-bilinear";
    case LayerKind::kConcat: return "concat";
    case LayerKind::kSigmoidScaled: return "sigmoid-scaled";
  }
  return "unknown";
}

int scale_channels(int channels, const Rational& scale) {
  // Round half up in integer arithmetic.
  const long long num = 2LL * channels * scale.num + scale.den;
  const long long scaled = num / (2LL * scale.den);
  return static_cast<int>(std::max<long long>(1, scaled));
}

namespace {

struct Builder {
  std::vector<LayerSpec> layers;
  std::map<std::string, std::size_t> index;
  Rational scale;

  const LayerSpec& get(const std::string& name) const { return layers[index.at(name)]; }

  void add(LayerSpec spec) {
    index[spec.name] = layers.size();
    layers.push_back(std::move(spec));
  }

  // Encoder/decoder conv followed by BN and ReLU.
  void conv(const std::string& name, int kernel, int stride, int out, const std::string& input,
            int in_channels, int res_in) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::kConv;
    s.kernel = kernel;
    s.stride = stride;
    s.in_channels = in_channels;
    s.out_channels = scale_channels(out, scale);
    s.inputs = {input};
    s.has_batchnorm = true;
    s.has_relu = true;
    s.res_in = res_in;
    s.res_out = stride == 2 ? res_in + 1 : res_in;
    add(std::move(s));
  }
  void conv(const std::string& name, int kernel, int stride, int out, const std::string& input) {
    const LayerSpec& src = get(input);
    conv(name, kernel, stride, out, input, src.out_channels, src.res_out);
  }

  // Inverse-depth head: plain conv with bias, then the scaled sigmoid.
  void disp(const std::string& name, const std::string& input) {
    const LayerSpec& src = get(input);
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::kConv;
    s.kernel = 3;
    s.stride = 1;
    s.in_channels = src.out_channels;
    s.out_channels = 1;
    s.inputs = {input};
    s.res_in = s.res_out = src.res_out;
    add(s);
    LayerSpec sig;
    sig.name = name + "_sigmoid";
    sig.kind = LayerKind::kSigmoidScaled;
    sig.in_channels = sig.out_channels = 1;
    sig.inputs = {name};
    sig.res_in = sig.res_out = s.res_out;
    add(std::move(sig));
  }

  void upsample(const std::string& name, const std::string& source, const std::string& size_ref) {
    const LayerSpec& src = get(source);
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::kUpsampleBilinear;
    s.in_channels = s.out_channels = src.out_channels;
    s.inputs = {source, size_ref};
    s.res_in = src.res_out;
    s.res_out = get(size_ref).res_out;
    add(std::move(s));
  }

  void concat(const std::string& name, std::vector<std::string> inputs) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::kConcat;
    for (const auto& in : inputs) s.in_channels += get(in).out_channels;
    s.out_channels = s.in_channels;
    s.res_in = s.res_out = get(inputs.front()).res_out;
    s.inputs = std::move(inputs);
    add(std::move(s));
  }
};

}  // namespace

std::vector<LayerSpec> build_layout(const NetworkConfig& config) {
  if (config.n_depth_samples < 1) throw InvalidConfig("n_depth_samples must be at least 1");
  if (config.channel_width_scale.num < 1 || config.channel_width_scale.den < 1) {
    throw InvalidConfig("channel_width_scale must be a positive rational");
  }
  if (!(config.sigmoid_scale > 0.0) || !std::isfinite(config.sigmoid_scale)) {
    throw InvalidConfig("sigmoid_scale must be positive and finite");
  }
  if (!(config.batchnorm.epsilon > 0.0)) throw InvalidConfig("batchnorm epsilon must be positive");

  Builder b;
  b.scale = config.channel_width_scale;
  b.conv("conv1", 7, 1, 128, kInputName, config.n_depth_samples + 3, 0);
  b.conv("conv1_1", 7, 2, 128, "conv1");
  b.conv("conv2", 5, 1, 256, "conv1_1");
  b.conv("conv2_1", 5, 2, 256, "conv2");
  b.conv("conv3", 3, 1, 512, "conv2_1");
  b.conv("conv3_1", 3, 2, 512, "conv3");
  b.conv("conv4", 3, 1, 512, "conv3_1");
  b.conv("conv4_1", 3, 2, 512, "conv4");
  b.conv("conv5", 3, 1, 512, "conv4_1");
  b.conv("conv5_1", 3, 2, 512, "conv5");

  b.upsample("conv5_up", "conv5_1", "conv4_1");
  b.conv("upconv4", 3, 1, 512, "conv5_up");
  b.concat("iconv4_in", {"upconv4", "conv4_1"});
  b.conv("iconv4", 3, 1, 512, "iconv4_in");

  b.upsample("iconv4_up", "iconv4", "conv3_1");
  b.conv("upconv3", 3, 1, 512, "iconv4_up");
  b.concat("iconv3_in", {"upconv3", "conv3_1"});
  b.conv("iconv3", 3, 1, 512, "iconv3_in");
  b.disp("disp3", "iconv3");

  b.upsample("iconv3_up", "iconv3", "conv2_1");
  b.conv("upconv2", 3, 1, 256, "iconv3_up");
  b.upsample("disp3_up", "disp3_sigmoid", "conv2_1");
  b.concat("iconv2_in", {"upconv2", "conv2_1", "disp3_up"});
  b.conv("iconv2", 3, 1, 256, "iconv2_in");
  b.disp("disp2", "iconv2");

  b.upsample("iconv2_up", "iconv2", "conv1_1");
  b.conv("upconv1", 3, 1, 128, "iconv2_up");
  b.upsample("disp2_up", "disp2_sigmoid", "conv1_1");
  b.concat("iconv1_in", {"upconv1", "conv1_1", "disp2_up"});
  b.conv("iconv1", 3, 1, 128, "iconv1_in");
  b.disp("disp1", "iconv1");

  b.upsample("iconv1_up", "iconv1", "conv1");
  b.conv("upconv0", 3, 1, 64, "iconv1_up");
  b.upsample("disp1_up", "disp1_sigmoid", "conv1");
  b.concat("iconv0_in", {"upconv0", "disp1_up"});
  b.conv("iconv0", 3, 1, 64, "iconv0_in");
  b.disp("disp0", "iconv0");
  return std::move(b.layers);
}

template <typename T>
struct NetworkGraph<T>::ConvState {
  std::vector<T> weight, bias, gamma, beta, running_mean, running_var;
  std::vector<T> dweight, dbias, dgamma, dbeta;
};

template <typename T>
NetworkGraph<T>::NetworkGraph(const NetworkConfig& config)
    : config_(config), layers_(build_layout(config)) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < layers_.size(); ++i) index[layers_[i].name] = static_cast<int>(i);
  input_index_.resize(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (const auto& in : layers_[i].inputs) {
      input_index_[i].push_back(in == kInputName ? -1 : index.at(in));
    }
  }
  for (const char* name : kOutputNames) layer_of_output_.push_back(index.at(name));

  conv_.resize(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& s = layers_[i];
    if (s.kind != LayerKind::kConv) continue;
    ConvState& st = conv_[i];
    const auto out = static_cast<std::size_t>(s.out_channels);
    st.weight.assign(out * static_cast<std::size_t>(s.in_channels) * s.kernel * s.kernel, T(0));
    st.dweight.assign(st.weight.size(), T(0));
    if (s.has_batchnorm) {
      st.gamma.assign(out, T(1));
      st.beta.assign(out, T(0));
      st.dgamma.assign(out, T(0));
      st.dbeta.assign(out, T(0));
      st.running_mean.assign(out, T(0));
      st.running_var.assign(out, T(1));
    } else {
      st.bias.assign(out, T(0));
      st.dbias.assign(out, T(0));
    }
  }
}

template <typename T>
NetworkGraph<T>::~NetworkGraph() = default;
template <typename T>
NetworkGraph<T>::NetworkGraph(NetworkGraph&&) noexcept = default;
template <typename T>
NetworkGraph<T>& NetworkGraph<T>::operator=(NetworkGraph&&) noexcept = default;

template <typename T>
const LayerSpec& NetworkGraph<T>::layer(const std::string& name) const {
  for (const auto& s : layers_) {
    if (s.name == name) return s;
  }
  throw InvalidConfig("no layer named " + name);
}

template <typename T>
void NetworkGraph<T>::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& s = layers_[i];
    if (s.kind != LayerKind::kConv) continue;
    ConvState& st = conv_[i];
    const double fan_in = static_cast<double>(s.in_channels) * s.kernel * s.kernel;
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (T& w : st.weight) w = static_cast<T>(dist(rng));
    std::fill(st.bias.begin(), st.bias.end(), T(0));
    std::fill(st.gamma.begin(), st.gamma.end(), T(1));
    std::fill(st.beta.begin(), st.beta.end(), T(0));
    std::fill(st.running_mean.begin(), st.running_mean.end(), T(0));
    std::fill(st.running_var.begin(), st.running_var.end(), T(1));
  }
  zero_grad();
}

template <typename T>
std::size_t NetworkGraph<T>::parameter_count() const {
  std::size_t n = 0;
  for (const ConvState& st : conv_) {
    n += st.weight.size() + st.bias.size() + st.gamma.size() + st.beta.size();
  }
  return n;
}

template <typename T>
std::vector<ParameterView<T>> NetworkGraph<T>::parameters() {
  std::vector<ParameterView<T>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].kind != LayerKind::kConv) continue;
    ConvState& st = conv_[i];
    const std::string& name = layers_[i].name;
    out.push_back({name + ".weight", st.weight, st.dweight});
    if (!st.bias.empty()) out.push_back({name + ".bias", st.bias, st.dbias});
    if (!st.gamma.empty()) {
      out.push_back({name + ".bn_gamma", st.gamma, st.dgamma});
      out.push_back({name + ".bn_beta", st.beta, st.dbeta});
    }
  }
  return out;
}

template <typename T>
std::vector<ParameterView<T>> NetworkGraph<T>::buffers() {
  std::vector<ParameterView<T>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    ConvState& st = conv_[i];
    if (st.running_mean.empty()) continue;
    const std::string& name = layers_[i].name;
    out.push_back({name + ".running_mean", st.running_mean, {}});
    out.push_back({name + ".running_var", st.running_var, {}});
  }
  return out;
}

template <typename T>
void NetworkGraph<T>::zero_grad() {
  for (ConvState& st : conv_) {
    std::fill(st.dweight.begin(), st.dweight.end(), T(0));
    std::fill(st.dbias.begin(), st.dbias.end(), T(0));
    std::fill(st.dgamma.begin(), st.dgamma.end(), T(0));
    std::fill(st.dbeta.begin(), st.dbeta.end(), T(0));
  }
}

template <typename T>
void NetworkGraph<T>::check_input(const Shape& shape) const {
  std::ostringstream msg;
  if (shape.n < 1) {
    msg << "empty batch";
  } else if (shape.c != config_.n_depth_samples + 3) {
    msg << "input has " << shape.c << " channels, expected " << config_.n_depth_samples + 3;
  } else if (shape.h < kSpatialMultiple || shape.w < kSpatialMultiple ||
             shape.h % kSpatialMultiple != 0 || shape.w % kSpatialMultiple != 0) {
    msg << "input " << shape.w << "x" << shape.h << " is not a multiple of " << kSpatialMultiple;
  } else {
    return;
  }
  throw ShapeMismatch(msg.str());
}

template <typename T>
std::array<Shape, 4> NetworkGraph<T>::output_shapes(int h, int w) const {
  check_input({1, config_.n_depth_samples + 3, h, w});
  std::vector<Shape> shapes(layers_.size());
  const Shape input{1, config_.n_depth_samples + 3, h, w};
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& s = layers_[i];
    const auto& ins = input_index_[i];
    const Shape& first = ins[0] < 0 ? input : shapes[static_cast<std::size_t>(ins[0])];
    Shape out = first;
    out.c = s.out_channels;
    if (s.kind == LayerKind::kConv) {
      const ConvGeometry g{s.kernel, s.stride, s.kernel / 2};
      out.h = conv_output_size(first.h, g);
      out.w = conv_output_size(first.w, g);
    } else if (s.kind == LayerKind::kUpsampleBilinear) {
      const Shape& ref = shapes[static_cast<std::size_t>(ins[1])];
      out.h = ref.h;
      out.w = ref.w;
    }
    shapes[i] = out;
  }
  std::array<Shape, 4> result;
  for (std::size_t k = 0; k < 4; ++k) {
    result[k] = shapes[static_cast<std::size_t>(layer_of_output_[k])];
  }
  return result;
}

template <typename T>
Prediction<T> NetworkGraph<T>::forward(const Tensor<T>& input, ForwardMode mode,
                                       ForwardRecord<T>* record) {
  check_input(input.shape());
  const std::size_t count = layers_.size();

  // Without a record, activations are released after their last consumer.
  std::vector<std::size_t> last_use(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    for (int in : input_index_[i]) {
      if (in >= 0) last_use[static_cast<std::size_t>(in)] = i;
    }
  }
  for (int o : layer_of_output_) last_use[static_cast<std::size_t>(o)] = count;

  ForwardRecord<T> local;
  ForwardRecord<T>& rec = record ? *record : local;
  rec.mode = mode;
  rec.outputs.assign(count, Tensor<T>());
  rec.batchnorm.assign(count, BatchNormCache<T>());
  if (record) rec.input = input;
  auto source = [&](int idx) -> const Tensor<T>& {
    return idx < 0 ? input : rec.outputs[static_cast<std::size_t>(idx)];
  };

  const T lo = std::numeric_limits<T>::epsilon();
  const T hi = T(1) - std::numeric_limits<T>::epsilon();
  const T scale = static_cast<T>(config_.sigmoid_scale);

  for (std::size_t i = 0; i < count; ++i) {
    const LayerSpec& s = layers_[i];
    const auto& ins = input_index_[i];
    Tensor<T>& y = rec.outputs[i];
    switch (s.kind) {
      case LayerKind::kConv: {
        ConvState& st = conv_[i];
        const ConvGeometry g{s.kernel, s.stride, s.kernel / 2};
        Tensor<T> z;
        conv2d_forward(source(ins[0]), st.weight.data(), s.out_channels, g, z);
        if (s.has_batchnorm) {
          batchnorm_forward(z, st.gamma.data(), st.beta.data(), st.running_mean.data(),
                            st.running_var.data(), mode.training, mode.update_running_stats,
                            config_.batchnorm, y, record ? &rec.batchnorm[i] : nullptr);
        } else {
          y = std::move(z);
          for (int n = 0; n < y.n(); ++n) {
            for (int c = 0; c < y.c(); ++c) {
              T* p = y.channel(n, c);
              const T b = st.bias[static_cast<std::size_t>(c)];
              for (std::size_t j = 0; j < y.plane(); ++j) p[j] += b;
            }
          }
        }
        if (s.has_relu) {
          for (T& v : y.values()) v = v > T(0) ? v : T(0);
        }
        break;
      }
      case LayerKind::kUpsampleBilinear: {
        const Tensor<T>& ref = source(ins[1]);
        upsample_bilinear_forward(source(ins[0]), ref.h(), ref.w(), y);
        break;
      }
      case LayerKind::kConcat: {
        const Tensor<T>& first = source(ins[0]);
        y = Tensor<T>(first.n(), s.out_channels, first.h(), first.w());
        for (int n = 0; n < y.n(); ++n) {
          T* dst = y.sample(n);
          for (int in : ins) {
            const Tensor<T>& x = source(in);
            dst = std::copy(x.sample(n), x.sample(n) + x.sample_size(), dst);
          }
        }
        break;
      }
      case LayerKind::kSigmoidScaled: {
        const Tensor<T>& x = source(ins[0]);
        y = Tensor<T>(x.shape());
        for (std::size_t j = 0; j < x.size(); ++j) {
          const double sig = 1.0 / (1.0 + std::exp(-static_cast<double>(x.data()[j])));
          y.data()[j] = scale * std::clamp(static_cast<T>(sig), lo, hi);
        }
        break;
      }
    }
    if (!record) {
      for (int in : ins) {
        if (in >= 0 && last_use[static_cast<std::size_t>(in)] == i) {
          rec.outputs[static_cast<std::size_t>(in)] = Tensor<T>();
        }
      }
    }
  }

  Prediction<T> pred;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto idx = static_cast<std::size_t>(layer_of_output_[k]);
    pred.scales[k] = record ? rec.outputs[idx] : std::move(rec.outputs[idx]);
  }
  return pred;
}

template <typename T>
void NetworkGraph<T>::backward(const ForwardRecord<T>& record,
                               const std::array<Tensor<T>, 4>& output_grads) {
  const std::size_t count = layers_.size();
  if (record.outputs.size() != count) throw ShapeMismatch("forward record does not match graph");
  std::vector<Tensor<T>> grads(count);
  auto grad_of = [&](int idx) -> Tensor<T>* {
    if (idx < 0) return nullptr;
    Tensor<T>& g = grads[static_cast<std::size_t>(idx)];
    if (g.size() == 0) g = Tensor<T>(record.outputs[static_cast<std::size_t>(idx)].shape());
    return &g;
  };
  for (std::size_t k = 0; k < 4; ++k) {
    const auto idx = static_cast<std::size_t>(layer_of_output_[k]);
    if (output_grads[k].shape() != record.outputs[idx].shape()) {
      throw ShapeMismatch("output gradient shape does not match prediction");
    }
    Tensor<T>* g = grad_of(layer_of_output_[k]);
    for (std::size_t j = 0; j < g->size(); ++j) g->data()[j] += output_grads[k].data()[j];
  }
  const T scale = static_cast<T>(config_.sigmoid_scale);
  const T lo = scale * std::numeric_limits<T>::epsilon();
  const T hi = scale * (T(1) - std::numeric_limits<T>::epsilon());

  for (std::size_t r = count; r-- > 0;) {
    Tensor<T>& dy = grads[r];
    if (dy.size() == 0) continue;
    const LayerSpec& s = layers_[r];
    const auto& ins = input_index_[r];
    const Tensor<T>& y = record.outputs[r];
    switch (s.kind) {
      case LayerKind::kSigmoidScaled: {
        Tensor<T>* dx = grad_of(ins[0]);
        for (std::size_t j = 0; j < y.size(); ++j) {
          const T v = y.data()[j];
          if (v <= lo || v >= hi) continue;  // clamped
          dx->data()[j] += dy.data()[j] * v * (T(1) - v / scale);
        }
        break;
      }
      case LayerKind::kConcat: {
        std::size_t offset = 0;
        for (int in : ins) {
          Tensor<T>* dx = grad_of(in);
          const std::size_t len = dx->sample_size();
          for (int n = 0; n < dy.n(); ++n) {
            const T* src = dy.sample(n) + offset;
            T* dst = dx->sample(n);
            for (std::size_t j = 0; j < len; ++j) dst[j] += src[j];
          }
          offset += len;
        }
        break;
      }
      case LayerKind::kUpsampleBilinear: {
        upsample_bilinear_backward(dy, *grad_of(ins[0]));
        break;
      }
      case LayerKind::kConv: {
        ConvState& st = conv_[r];
        if (s.has_relu) {
          for (std::size_t j = 0; j < y.size(); ++j) {
            if (!(y.data()[j] > T(0))) dy.data()[j] = T(0);
          }
        }
        Tensor<T> dz_storage;
        const Tensor<T>* dz = &dy;
        if (s.has_batchnorm) {
          dz_storage = Tensor<T>(dy.shape());
          batchnorm_backward(dy, st.gamma.data(), record.batchnorm[r], st.dgamma.data(),
                             st.dbeta.data(), dz_storage);
          dz = &dz_storage;
        } else {
          for (int n = 0; n < dy.n(); ++n) {
            for (int c = 0; c < dy.c(); ++c) {
              const T* p = dy.channel(n, c);
              double sum = 0.0;
              for (std::size_t j = 0; j < dy.plane(); ++j) sum += static_cast<double>(p[j]);
              st.dbias[static_cast<std::size_t>(c)] += static_cast<T>(sum);
            }
          }
        }
        const Tensor<T>& x = ins[0] < 0 ? record.input
                                        : record.outputs[static_cast<std::size_t>(ins[0])];
        const ConvGeometry g{s.kernel, s.stride, s.kernel / 2};
        conv2d_backward(x, st.weight.data(), s.out_channels, g, *dz, st.dweight.data(),
                        grad_of(ins[0]));
        break;
      }
    }
    dy = Tensor<T>();
  }
}

template class NetworkGraph<float>;
template class NetworkGraph<double>;

}  // namespace mvdepth::depthnet
