#include "mvdepth/cost_volume.hpp"

#include "mvdepth/errors.hpp"
#include "mvdepth/io/binary.hpp"
#include "mvdepth/kernels/bilinear.hpp"
#include "mvdepth/kernels/cost_kernels.hpp"
#include "mvdepth/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace mvdepth {

namespace {

std::array<double, 9> row_major(const Mat3& m) {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(r * 3 + c)] = m(r, c);
  }
  return out;
}

void check_pair(const Frame& reference, const Frame& measurement) {
  if (reference.image.width() != measurement.image.width() ||
      reference.image.height() != measurement.image.height() ||
      reference.image.channels() != measurement.image.channels()) {
    throw FrameMismatch("measurement frame '" + measurement.id +
                        "' does not match the reference image shape");
  }
}

}  // namespace

void Frame::validate() const {
  intrinsics.validate();
  if (image.width() != intrinsics.width || image.height() != intrinsics.height) {
    std::ostringstream msg;
    msg << "frame '" << id << "': image is " << image.width() << "x" << image.height()
        << " but intrinsics declare " << intrinsics.width << "x" << intrinsics.height;
    throw FrameMismatch(msg.str());
  }
  if (image.channels() != 1 && image.channels() != 3) {
    throw FrameMismatch("frame '" + id + "': images must have 1 or 3 channels");
  }
}

std::optional<std::vector<double>> sample_bilinear(const Image& image, const Vec2& pixel) {
  kernels::BilinearTap tap;
  if (!kernels::bilinear_tap(pixel.x(), pixel.y(), image.width(), image.height(), tap)) {
    return std::nullopt;
  }
  std::vector<double> out(static_cast<std::size_t>(image.channels()));
  for (int c = 0; c < image.channels(); ++c) {
    out[static_cast<std::size_t>(c)] =
        kernels::bilinear_sample(image.plane(c).data(), image.width(), tap);
  }
  return out;
}

CostSlice warp_cost_slice(const Frame& reference, const Frame& measurement, double depth) {
  reference.validate();
  measurement.validate();
  check_pair(reference, measurement);

  const int w = reference.image.width();
  const int h = reference.image.height();
  const Pose m_from_r = relative_pose(measurement.pose, reference.pose);
  const auto p = row_major(
      warp_matrix(reference.intrinsics, measurement.intrinsics, m_from_r, depth).P);

  CostSlice slice{Grid<double>(w, h, 0.0), Mask(w, h, 0)};
  std::vector<std::uint16_t> counts(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
  for (int y = 0; y < h; ++y) {
    kernels::warp_cost_row({p.data(), y, w, h, reference.image.channels(),
                            reference.image.data(), measurement.image.data(),
                            slice.cost.row(y).data(),
                            counts.data() + static_cast<std::size_t>(y) * w});
  }
  for (std::size_t i = 0; i < counts.size(); ++i) slice.valid[i] = counts[i] > 0 ? 1 : 0;
  return slice;
}

CostVolume build_cost_volume(const Frame& reference, std::span<const Frame> measurements,
                             const DepthHypotheses& hypotheses, int workers) {
  if (measurements.empty()) throw EmptyMeasurementSet("at least one measurement frame is required");
  if (measurements.size() > 0xFFFF) throw InvalidConfig("too many measurement frames");
  reference.validate();
  for (const Frame& m : measurements) {
    m.validate();
    check_pair(reference, m);
  }

  // Fixed reduction order: ascending id, then input position for equal ids.
  std::vector<std::size_t> order(measurements.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return measurements[a].id < measurements[b].id;
  });
  std::vector<Pose> m_from_r;
  m_from_r.reserve(order.size());
  for (std::size_t i : order) m_from_r.push_back(relative_pose(measurements[i].pose, reference.pose));

  CostVolume volume;
  volume.hypotheses = hypotheses;
  volume.width = reference.image.width();
  volume.height = reference.image.height();
  const std::size_t plane = volume.plane_size();
  volume.costs.assign(plane * hypotheses.size(), 0.0);
  volume.valid_counts.assign(plane * hypotheses.size(), 0);

  const int w = volume.width;
  const int h = volume.height;
  const int channels = reference.image.channels();

  parallel_for(hypotheses.size(), workers, [&](std::size_t d) {
    double* cost = volume.costs.data() + d * plane;
    std::uint16_t* count = volume.valid_counts.data() + d * plane;
    const double depth = hypotheses.depth(d);
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Frame& meas = measurements[order[k]];
      const auto p =
          row_major(warp_matrix(reference.intrinsics, meas.intrinsics, m_from_r[k], depth).P);
      for (int y = 0; y < h; ++y) {
        const std::size_t off = static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
        kernels::warp_cost_row({p.data(), y, w, h, channels, reference.image.data(),
                                meas.image.data(), cost + off, count + off});
      }
    }

    double max_valid = -1.0;
    for (std::size_t i = 0; i < plane; ++i) {
      if (count[i] > 0) {
        cost[i] /= static_cast<double>(count[i]);
        max_valid = std::max(max_valid, cost[i]);
      }
    }
    const double fill = max_valid >= 0.0 ? max_valid : kEmptySliceFill;
    for (std::size_t i = 0; i < plane; ++i) {
      if (count[i] == 0) cost[i] = fill;
    }
  });
  return volume;
}

void write_cost_volume(const CostVolume& volume, const std::filesystem::path& path,
                       const std::filesystem::path& sidecar) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write("MVCV", 4);
  io::write_u32_le(out, static_cast<std::uint32_t>(volume.depth_count()));
  io::write_u32_le(out, static_cast<std::uint32_t>(volume.height));
  io::write_u32_le(out, static_cast<std::uint32_t>(volume.width));
  for (double c : volume.costs) io::write_f32_le(out, static_cast<float>(c));
  if (!out) throw IoError("failed writing " + path.string());

  std::ofstream side(sidecar);
  if (!side) throw IoError("cannot open " + sidecar.string() + " for writing");
  side << std::setprecision(17);
  for (double inv : volume.hypotheses.inverse_depths()) side << inv << '\n';
}

CostVolume read_cost_volume(const std::filesystem::path& path,
                            const std::filesystem::path& sidecar) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "MVCV") throw FormatError(path.string() + ": bad magic");
  const std::uint32_t nd = io::read_u32_le(in);
  const std::uint32_t h = io::read_u32_le(in);
  const std::uint32_t w = io::read_u32_le(in);

  std::ifstream side(sidecar);
  if (!side) throw IoError("cannot open " + sidecar.string());
  std::vector<double> inv;
  for (double v; side >> v;) inv.push_back(v);
  if (inv.size() != nd || nd < 2) throw FormatError("sidecar depth count does not match volume");

  CostVolume volume;
  volume.hypotheses = sample_inverse_depths(1.0 / inv.back(), 1.0 / inv.front(), nd);
  volume.width = static_cast<int>(w);
  volume.height = static_cast<int>(h);
  const std::size_t n = static_cast<std::size_t>(nd) * h * w;
  volume.costs.resize(n);
  for (std::size_t i = 0; i < n; ++i) volume.costs[i] = io::read_f32_le(in);
  if (!in) throw FormatError(path.string() + ": truncated volume");
  volume.valid_counts.assign(n, 1);
  return volume;
}

}  // namespace mvdepth
