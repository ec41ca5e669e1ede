#include "mvdepth/io/config.hpp"

#include "mvdepth/errors.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mvdepth::io {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto sep = line.find_first_of("=: \t");
    if (sep == std::string::npos) {
      throw FormatError("config line " + std::to_string(number) + ": missing value for '" + line +
                        "'");
    }
    std::string key = trim(line.substr(0, sep));
    std::string rest = trim(line.substr(sep + 1));
    // "key = value" and "key : value" leave the separator at the front.
    if (!rest.empty() && (rest.front() == '=' || rest.front() == ':')) rest = trim(rest.substr(1));
    if (key.empty() || rest.empty()) {
      throw FormatError("config line " + std::to_string(number) + ": expected 'key value'");
    }
    cfg.values_[key] = rest;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw FormatError("config key '" + key + "' is not a number: " + *v);
  }
  return out;
}

std::optional<long long> KeyValueConfig::get_int(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw FormatError("config key '" + key + "' is not an integer: " + *v);
  }
  return out;
}

double KeyValueConfig::require_double(const std::string& key) const {
  const auto v = get_double(key);
  if (!v) throw FormatError("config key '" + key + "' is missing");
  return *v;
}

long long KeyValueConfig::require_int(const std::string& key) const {
  const auto v = get_int(key);
  if (!v) throw FormatError("config key '" + key + "' is missing");
  return *v;
}

Intrinsics intrinsics_from_config(const KeyValueConfig& config) {
  Intrinsics k;
  k.fx = config.require_double("fx");
  k.fy = config.require_double("fy");
  k.cx = config.require_double("cx");
  k.cy = config.require_double("cy");
  k.width = static_cast<int>(config.require_int("width"));
  k.height = static_cast<int>(config.require_int("height"));
  k.validate();
  return k;
}

Intrinsics load_intrinsics(const std::filesystem::path& path) {
  return intrinsics_from_config(KeyValueConfig::load(path));
}

void write_intrinsics(const Intrinsics& intrinsics, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  out << "fx " << intrinsics.fx << "\nfy " << intrinsics.fy << "\ncx " << intrinsics.cx
      << "\ncy " << intrinsics.cy << "\nwidth " << intrinsics.width << "\nheight "
      << intrinsics.height << "\n";
}

}  // namespace mvdepth::io
