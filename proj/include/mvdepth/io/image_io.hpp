#pragma once

#include "mvdepth/image.hpp"

#include <cstdint>
#include <filesystem>

namespace mvdepth::io {

/// TUM depth PNGs store meters * 5000.
inline constexpr double kTumDepthScale = 5000.0;

/// 8-bit RGB PNG as a 3-channel image in [0, 1]. Throws IoError,
/// DecodeError, or BitDepthError for any other pixel format.
Image read_png_rgb(const std::filesystem::path& path);
/// Values are clamped to [0, 1] and rounded to 8 bits. Gray images are
/// replicated into all three channels.
void write_png_rgb(const Image& image, const std::filesystem::path& path);

/// 16-bit grayscale PNG. Throws IoError, DecodeError, BitDepthError.
Grid<std::uint16_t> read_png_gray16(const std::filesystem::path& path);
void write_png_gray16(const Grid<std::uint16_t>& values, const std::filesystem::path& path);

/// meters = raw / scale; raw 0 is an invalid pixel.
DepthMap load_depth_png(const std::filesystem::path& path, double scale = kTumDepthScale);
/// Rounds depth * scale; invalid pixels and values outside [1, 65535] after
/// rounding are written as 0.
void write_depth_png(const DepthMap& depth, const std::filesystem::path& path,
                     double scale = kTumDepthScale);

/// Grayscale PFM: "Pf\n<W> <H>\n-1.0\n" then little-endian f32 rows from
/// bottom to top. NaN marks invalid pixels.
void write_pfm(const Grid<float>& values, const std::filesystem::path& path);
Grid<float> read_pfm(const std::filesystem::path& path);

void write_depth_pfm(const DepthMap& depth, const std::filesystem::path& path);
/// NaN (and non-positive) values become invalid pixels.
DepthMap read_depth_pfm(const std::filesystem::path& path);

/// Reads a depth map from .pfm or .png (TUM scale) by extension.
DepthMap load_depth_map(const std::filesystem::path& path, double png_scale = kTumDepthScale);

}  // namespace mvdepth::io
