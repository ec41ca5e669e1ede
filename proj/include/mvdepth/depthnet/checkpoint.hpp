#pragma once

#include "mvdepth/depthnet/network.hpp"
#include "mvdepth/image.hpp"

#include <filesystem>

namespace mvdepth::depthnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetworkGraph<float> network;
  NormalizationStats normalization;
};

/// "MVDN", u32 version, u32 N_d, u32 scale numerator, u32 scale denominator,
/// f32 sigmoid scale, u32 blob count, then per blob: u32 name length, name,
/// u32 rank, u32 dims..., little-endian f32 data. Parameters, batch-norm
/// running statistics and the normalization stats are all blobs.
void save_checkpoint(NetworkGraph<float>& net, const NormalizationStats& norm,
                     const std::filesystem::path& path);

/// Throws IoError, FormatError or InvalidConfig.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mvdepth::depthnet
