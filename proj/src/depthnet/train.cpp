#include "mvdepth/depthnet/train.hpp"

#include "mvdepth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mvdepth::depthnet {

template <typename T>
Tensor<T> assemble_input(const Image& reference, const CostVolume& volume) {
  if (reference.width() != volume.width || reference.height() != volume.height) {
    throw ShapeMismatch("reference image and cost volume differ in size");
  }
  if (reference.channels() != 1 && reference.channels() != 3) {
    throw ShapeMismatch("reference image must have 1 or 3 channels");
  }
  const int nd = static_cast<int>(volume.depth_count());
  Tensor<T> x(1, 3 + nd, volume.height, volume.width);
  for (int c = 0; c < 3; ++c) {
    const auto plane = reference.plane(reference.channels() == 3 ? c : 0);
    std::transform(plane.begin(), plane.end(), x.channel(0, c),
                   [](float v) { return static_cast<T>(v); });
  }
  for (int d = 0; d < nd; ++d) {
    const auto plane = volume.plane(static_cast<std::size_t>(d));
    std::transform(plane.begin(), plane.end(), x.channel(0, 3 + d),
                   [](double v) { return static_cast<T>(v); });
  }
  return x;
}

template Tensor<float> assemble_input<float>(const Image&, const CostVolume&);
template Tensor<double> assemble_input<double>(const Image&, const CostVolume&);

template <typename T>
Adam<T>::Adam(std::vector<ParameterView<T>> params, AdamSettings settings)
    : params_(std::move(params)), settings_(settings) {
  for (const auto& p : params_) {
    m_.emplace_back(p.value.size(), 0.0);
    v_.emplace_back(p.value.size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step(double learning_rate) {
  ++t_;
  const double b1 = settings_.beta1;
  const double b2 = settings_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = static_cast<double>(p.grad[i]);
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double update = learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + settings_.epsilon);
      p.value[i] = static_cast<T>(static_cast<double>(p.value[i]) - update);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

void shuffle_indices(std::vector<std::size_t>& indices, std::uint64_t& state_seed) {
  std::mt19937_64 rng(state_seed);
  for (std::size_t i = indices.size(); i > 1; --i) {
    // Modulo bias is irrelevant at dataset sizes far below 2^64.
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(indices[i - 1], indices[j]);
  }
  state_seed = rng();
}

namespace {

Tensor<float> stack_batch(std::span<const TrainingSample> dataset,
                          std::span<const std::size_t> batch) {
  Tensor<float> first = assemble_input<float>(dataset[batch[0]].reference, dataset[batch[0]].volume);
  if (batch.size() == 1) return first;
  Shape shape = first.shape();
  shape.n = static_cast<int>(batch.size());
  Tensor<float> x(shape);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Tensor<float> one =
        b == 0 ? std::move(first)
               : assemble_input<float>(dataset[batch[b]].reference, dataset[batch[b]].volume);
    if (one.shape().c != shape.c || one.shape().h != shape.h || one.shape().w != shape.w) {
      throw ShapeMismatch("training samples differ in shape");
    }
    std::copy(one.data(), one.data() + one.size(), x.sample(static_cast<int>(b)));
  }
  return x;
}

}  // namespace

TrainingLog train_toy(NetworkGraph<float>& net, std::span<const TrainingSample> dataset,
                      const TrainConfig& config) {
  if (dataset.empty()) throw InvalidConfig("training dataset is empty");
  if (config.batch_size < 1) throw InvalidConfig("batch_size must be at least 1");
  if (config.iterations < 0) throw InvalidConfig("iterations must be non-negative");
  if (!(config.learning_rate >= 0.0)) throw InvalidConfig("learning rate must be non-negative");

  std::vector<GtPyramid> pyramids;
  pyramids.reserve(dataset.size());
  for (const auto& s : dataset) pyramids.push_back(gt_pyramid(s.gt));

  Adam<float> adam(net.parameters(), config.adam);
  std::uint64_t shuffle_seed = config.seed;
  std::vector<std::size_t> order(dataset.size());
  std::size_t cursor = order.size();

  TrainingLog log;
  for (int it = 0; it < config.iterations; ++it) {
    // Whole dataset per step when it fits in one batch; otherwise batches
    // are drawn from a shuffled epoch and the incomplete tail is dropped.
    std::vector<std::size_t> batch;
    if (dataset.size() <= static_cast<std::size_t>(config.batch_size)) {
      batch.resize(dataset.size());
      for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    } else {
      if (cursor + static_cast<std::size_t>(config.batch_size) > order.size()) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle_indices(order, shuffle_seed);
        cursor = 0;
      }
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                   order.begin() + static_cast<std::ptrdiff_t>(cursor + config.batch_size));
      cursor += static_cast<std::size_t>(config.batch_size);
    }
    std::sort(batch.begin(), batch.end());

    const Tensor<float> x = stack_batch(dataset, batch);
    std::vector<GtPyramid> gt;
    for (std::size_t i : batch) gt.push_back(pyramids[i]);

    net.zero_grad();
    ForwardRecord<float> record;
    const Prediction<float> pred = net.forward(x, {true, true}, &record);
    std::array<Tensor<float>, 4> grads;
    const double loss = multiscale_l1_loss(pred, std::span<const GtPyramid>(gt), &grads);
    const double l1 = l1_inverse_error(pred.scales[0], std::span<const GtPyramid>(gt));

    double lr = config.learning_rate;
    if (config.lr_decay_every > 0) {
      lr *= std::pow(config.lr_decay_factor, it / config.lr_decay_every);
    }
    log.records.push_back({it, loss, l1, lr});
    if (config.target_l1_inv > 0.0 && l1 < config.target_l1_inv) {
      log.reached_target = true;
      break;
    }
    net.backward(record, grads);
    adam.step(lr);
  }
  return log;
}

double evaluate_l1_inv(NetworkGraph<float>& net, std::span<const TrainingSample> dataset) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : dataset) {
    const Tensor<float> x = assemble_input<float>(s.reference, s.volume);
    const Prediction<float> pred = net.forward(x, {});
    const GtPyramid gt = gt_pyramid(s.gt);
    const std::size_t valid = gt[0].count_valid();
    sum += l1_inverse_error(pred.scales[0], std::span<const GtPyramid>(&gt, 1)) *
           static_cast<double>(valid);
    n += valid;
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace mvdepth::depthnet
