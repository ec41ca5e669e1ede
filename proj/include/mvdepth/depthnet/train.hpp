#pragma once

#include "mvdepth/cost_volume.hpp"
#include "mvdepth/depthnet/loss.hpp"
#include "mvdepth/depthnet/network.hpp"
#include "mvdepth/image.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mvdepth::depthnet {

/// Stacks the reference image (3 channels; a gray image is replicated) on
/// top of the N_d cost planes as one network input sample. Throws
/// ShapeMismatch.
template <typename T>
Tensor<T> assemble_input(const Image& reference, const CostVolume& volume);

struct TrainingSample {
  Image reference;  // normalized
  CostVolume volume;
  DepthMap gt;
};

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam(std::vector<ParameterView<T>> params, AdamSettings settings = {});
  /// One update from the gradients currently stored in the views.
  void step(double learning_rate);
  std::int64_t steps() const { return t_; }

 private:
  std::vector<ParameterView<T>> params_;
  AdamSettings settings_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t t_ = 0;
};

struct TrainConfig {
  int iterations = 2000;
  int batch_size = 8;
  double learning_rate = 1e-4;
  AdamSettings adam;
  int lr_decay_every = 0;  // 0 disables step decay
  double lr_decay_factor = 0.5;
  double target_l1_inv = 0.0;  // stop once reached; 0 runs every iteration
  std::uint64_t seed = 1;
};

struct TrainingRecord {
  int iteration = 0;
  double loss = 0.0;
  double l1_inv = 0.0;
  double learning_rate = 0.0;
  bool operator==(const TrainingRecord&) const = default;
};

struct TrainingLog {
  std::vector<TrainingRecord> records;
  bool reached_target = false;
};

/// Deterministic in-place Fisher-Yates shuffle.
void shuffle_indices(std::vector<std::size_t>& indices, std::uint64_t& state_seed);

/// Adam on the multi-scale loss with seeded shuffling. Samples of a batch are
/// processed in ascending index order, so identical seeds give identical
/// logs. Loss and L1-inv are logged from each iteration's training-mode
/// forward, before the update. Throws InvalidConfig on an empty dataset.
TrainingLog train_toy(NetworkGraph<float>& net, std::span<const TrainingSample> dataset,
                      const TrainConfig& config);

/// Eval-mode L1-inv of `net` over `dataset` at full resolution.
double evaluate_l1_inv(NetworkGraph<float>& net, std::span<const TrainingSample> dataset);

}  // namespace mvdepth::depthnet
