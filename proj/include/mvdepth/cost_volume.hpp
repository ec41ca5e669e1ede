#pragma once

#include "mvdepth/geometry.hpp"
#include "mvdepth/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mvdepth {

/// One posed image. `image` is expected to be normalized already (see
/// normalize()); `pose` is world_from_camera.
struct Frame {
  Image image;
  Pose pose;
  Intrinsics intrinsics;
  std::string id;

  /// Throws FrameMismatch when the image does not match the intrinsics or
  /// has a channel count other than 1 or 3.
  void validate() const;
};

/// N_d x H x W matching costs, depth-major: plane d holds the costs of
/// hypothesis d for every pixel. Cells no measurement frame could see carry
/// a fill value and a zero valid count.
struct CostVolume {
  DepthHypotheses hypotheses;
  int width = 0;
  int height = 0;
  std::vector<double> costs;
  std::vector<std::uint16_t> valid_counts;

  std::size_t depth_count() const { return hypotheses.size(); }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(std::size_t d, int x, int y) const {
    return d * plane_size() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
  double cost(std::size_t d, int x, int y) const { return costs[index(d, x, y)]; }
  std::uint16_t count(std::size_t d, int x, int y) const { return valid_counts[index(d, x, y)]; }
  std::span<const double> plane(std::size_t d) const {
    return {costs.data() + d * plane_size(), plane_size()};
  }
  std::span<double> plane(std::size_t d) {
    return {costs.data() + d * plane_size(), plane_size()};
  }
  std::span<const std::uint16_t> count_plane(std::size_t d) const {
    return {valid_counts.data() + d * plane_size(), plane_size()};
  }

  bool operator==(const CostVolume& other) const {
    return width == other.width && height == other.height &&
           hypotheses.inverse_depths() == other.hypotheses.inverse_depths() &&
           costs == other.costs && valid_counts == other.valid_counts;
  }
};

/// Fill used for a slice in which no cell received a valid sample.
inline constexpr double kEmptySliceFill = 1.0;

/// Bilinear lookup of every channel; nullopt when the pixel lies outside
/// [0, W-1] x [0, H-1].
std::optional<std::vector<double>> sample_bilinear(const Image& image, const Vec2& pixel);

struct CostSlice {
  Grid<double> cost;  // channel-mean absolute difference; 0 where invalid
  Mask valid;
};

/// Costs of every reference pixel against one measurement frame at one
/// depth.
CostSlice warp_cost_slice(const Frame& reference, const Frame& measurement, double depth);

/// Plane-sweep cost volume averaged over the measurement frames that see
/// each cell. Measurements are reduced in ascending `id` order, so the
/// result is independent of their order in `measurements` and of `workers`.
/// Throws EmptyMeasurementSet or FrameMismatch.
CostVolume build_cost_volume(const Frame& reference, std::span<const Frame> measurements,
                             const DepthHypotheses& hypotheses, int workers = 1);

/// Binary dump: "MVCV", u32 N_d, u32 H, u32 W, then N_d*H*W little-endian
/// f32 costs, depth-major. The sidecar lists one inverse depth per line.
void write_cost_volume(const CostVolume& volume, const std::filesystem::path& path,
                       const std::filesystem::path& sidecar);

/// Reads a dump back. Costs come back as f32-rounded values and every
/// valid_count is 1 (the dump does not carry counts).
CostVolume read_cost_volume(const std::filesystem::path& path,
                            const std::filesystem::path& sidecar);

}  // namespace mvdepth
