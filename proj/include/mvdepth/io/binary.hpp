#pragma once

// Little-endian scalar encoding shared by the binary formats.

#include "mvdepth/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace mvdepth::io {

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4] = {};
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("unexpected end of file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f32_le(std::ostream& out, float v) {
  write_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

inline float read_f32_le(std::istream& in) { return std::bit_cast<float>(read_u32_le(in)); }

inline void write_f64_le(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  write_u32_le(out, static_cast<std::uint32_t>(bits));
  write_u32_le(out, static_cast<std::uint32_t>(bits >> 32));
}

inline double read_f64_le(std::istream& in) {
  const std::uint64_t lo = read_u32_le(in);
  const std::uint64_t hi = read_u32_le(in);
  return std::bit_cast<double>(lo | (hi << 32));
}

}  // namespace mvdepth::io
