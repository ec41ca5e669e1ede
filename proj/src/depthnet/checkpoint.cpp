#include "mvdepth/depthnet/checkpoint.hpp"

#include "mvdepth/errors.hpp"
#include "mvdepth/io/binary.hpp"

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace mvdepth::depthnet {

namespace {

constexpr char kMagic[4] = {'M', 'V', 'D', 'N'};

struct Blob {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

std::vector<std::uint32_t> dims_of(const NetworkGraph<float>& net, const std::string& name,
                                   std::size_t size) {
  const auto dot = name.rfind('.');
  if (name.substr(dot + 1) == "weight") {
    const LayerSpec& s = net.layer(name.substr(0, dot));
    return {static_cast<std::uint32_t>(s.out_channels), static_cast<std::uint32_t>(s.in_channels),
            static_cast<std::uint32_t>(s.kernel), static_cast<std::uint32_t>(s.kernel)};
  }
  return {static_cast<std::uint32_t>(size)};
}

void write_blob(std::ostream& out, const std::string& name, const std::vector<std::uint32_t>& dims,
                std::span<const float> data) {
  io::write_u32_le(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  io::write_u32_le(out, static_cast<std::uint32_t>(dims.size()));
  for (std::uint32_t d : dims) io::write_u32_le(out, d);
  for (float v : data) io::write_f32_le(out, v);
}

}  // namespace

void save_checkpoint(NetworkGraph<float>& net, const NormalizationStats& norm,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const NetworkConfig& cfg = net.config();
  auto params = net.parameters();
  auto buffers = net.buffers();

  out.write(kMagic, 4);
  io::write_u32_le(out, kCheckpointVersion);
  io::write_u32_le(out, static_cast<std::uint32_t>(cfg.n_depth_samples));
  io::write_u32_le(out, static_cast<std::uint32_t>(cfg.channel_width_scale.num));
  io::write_u32_le(out, static_cast<std::uint32_t>(cfg.channel_width_scale.den));
  io::write_f32_le(out, static_cast<float>(cfg.sigmoid_scale));
  io::write_u32_le(out, static_cast<std::uint32_t>(params.size() + buffers.size() + 2));
  for (const auto* list : {&params, &buffers}) {
    for (const auto& p : *list) {
      write_blob(out, p.name, dims_of(net, p.name, p.value.size()), p.value);
    }
  }
  const float mean = static_cast<float>(norm.mean);
  const float stddev = static_cast<float>(norm.stddev);
  write_blob(out, "norm.mean", {1}, std::span<const float>(&mean, 1));
  write_blob(out, "norm.std", {1}, std::span<const float>(&stddev, 1));
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kMagic)) throw FormatError("not a checkpoint file");
  const std::uint32_t version = io::read_u32_le(in);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  NetworkConfig cfg;
  cfg.n_depth_samples = static_cast<int>(io::read_u32_le(in));
  cfg.channel_width_scale.num = static_cast<int>(io::read_u32_le(in));
  cfg.channel_width_scale.den = static_cast<int>(io::read_u32_le(in));
  cfg.sigmoid_scale = io::read_f32_le(in);
  const std::uint32_t count = io::read_u32_le(in);

  std::map<std::string, Blob> blobs;
  for (std::uint32_t b = 0; b < count; ++b) {
    const std::uint32_t len = io::read_u32_le(in);
    if (len > 4096) throw FormatError("blob name too long");
    std::string name(len, '\0');
    in.read(name.data(), len);
    Blob blob;
    const std::uint32_t rank = io::read_u32_le(in);
    if (rank > 8) throw FormatError("blob rank too large");
    std::size_t size = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      blob.dims.push_back(io::read_u32_le(in));
      size *= blob.dims.back();
    }
    if (size > (std::size_t{1} << 30)) throw FormatError("blob too large");
    blob.data.resize(size);
    for (float& v : blob.data) v = io::read_f32_le(in);
    blobs[name] = std::move(blob);
  }

  Checkpoint ck{NetworkGraph<float>(cfg), {}};
  auto take = [&](const std::string& name, std::span<float> dst) {
    auto it = blobs.find(name);
    if (it == blobs.end()) throw FormatError("checkpoint lacks blob " + name);
    if (it->second.data.size() != dst.size()) throw FormatError("blob size mismatch for " + name);
    std::copy(it->second.data.begin(), it->second.data.end(), dst.begin());
  };
  for (auto& p : ck.network.parameters()) take(p.name, p.value);
  for (auto& p : ck.network.buffers()) take(p.name, p.value);
  float mean = 0.0f;
  float stddev = 1.0f;
  take("norm.mean", std::span<float>(&mean, 1));
  take("norm.std", std::span<float>(&stddev, 1));
  ck.normalization = {mean, stddev};
  return ck;
}

}  // namespace mvdepth::depthnet
