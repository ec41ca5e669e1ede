#pragma once

#include "mvdepth/geometry.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace mvdepth::io {

/// Flat key-value text: one `key value`, `key=value` or `key: value` per
/// line, `#` starts a comment. Later keys override earlier ones.
class KeyValueConfig {
 public:
  /// Throws FormatError on a line without a value.
  static KeyValueConfig parse(const std::string& text);
  /// Throws IoError or FormatError.
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  /// Throws FormatError when present but not a number.
  std::optional<double> get_double(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;
  /// Throws FormatError when missing.
  double require_double(const std::string& key) const;
  long long require_int(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

 private:
  std::map<std::string, std::string> values_;
};

/// Keys fx, fy, cx, cy, width, height. Throws FormatError or
/// InvalidIntrinsics.
Intrinsics intrinsics_from_config(const KeyValueConfig& config);
Intrinsics load_intrinsics(const std::filesystem::path& path);
void write_intrinsics(const Intrinsics& intrinsics, const std::filesystem::path& path);

}  // namespace mvdepth::io
