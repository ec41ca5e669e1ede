#include "mvdepth/io/tum.hpp"

#include "mvdepth/errors.hpp"
#include "mvdepth/io/config.hpp"
#include "mvdepth/io/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mvdepth::io {

namespace {

// Yields the non-comment, non-blank lines with their line numbers.
template <typename Fn>
void for_each_row(std::istream& in, Fn&& fn) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    fn(line, number);
  }
}

struct Match {
  double gap;
  std::size_t a;
  std::size_t b;
};

// Greedy association of two sorted timestamp lists; returns b index per a
// (or npos).
template <typename A, typename B>
std::vector<std::size_t> greedy_match(const std::vector<A>& a, const std::vector<B>& b,
                                      double tolerance) {
  std::vector<Match> candidates;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (lo < b.size() && b[lo].timestamp < a[i].timestamp - tolerance) ++lo;
    for (std::size_t j = lo; j < b.size() && b[j].timestamp <= a[i].timestamp + tolerance; ++j) {
      const double gap = std::abs(a[i].timestamp - b[j].timestamp);
      if (gap <= tolerance) candidates.push_back({gap, i, j});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Match& x, const Match& y) { return x.gap < y.gap; });
  std::vector<std::size_t> match(a.size(), std::string::npos);
  std::vector<bool> used(b.size(), false);
  for (const Match& m : candidates) {
    if (match[m.a] != std::string::npos || used[m.b]) continue;
    match[m.a] = m.b;
    used[m.b] = true;
  }
  return match;
}

template <typename T>
void check_sorted(const std::vector<T>& list, const char* what) {
  for (std::size_t i = 1; i < list.size(); ++i) {
    if (!(list[i].timestamp > list[i - 1].timestamp)) {
      throw FormatError(std::string(what) + " timestamps are not strictly increasing");
    }
  }
}

}  // namespace

std::vector<TimedPath> parse_file_list(std::istream& in) {
  std::vector<TimedPath> out;
  for_each_row(in, [&](const std::string& line, int number) {
    std::istringstream row(line);
    TimedPath e;
    if (!(row >> e.timestamp >> e.path)) {
      throw FormatError("file list line " + std::to_string(number) + ": expected 'timestamp path'");
    }
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<TimedPose> parse_pose_list(std::istream& in) {
  std::vector<TimedPose> out;
  for_each_row(in, [&](const std::string& line, int number) {
    std::istringstream row(line);
    double t, tx, ty, tz, qx, qy, qz, qw;
    if (!(row >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw FormatError("pose line " + std::to_string(number) +
                        ": expected 'timestamp tx ty tz qx qy qz qw'");
    }
    out.push_back({t, Pose::from_quaternion(qx, qy, qz, qw, Vec3(tx, ty, tz))});
  });
  return out;
}

SequenceIndex associate(const std::vector<TimedPath>& rgb, const std::vector<TimedPath>& depth,
                        const std::vector<TimedPose>& poses, double tolerance) {
  if (!(tolerance >= 0.0)) throw InvalidConfig("association tolerance must be non-negative");
  check_sorted(rgb, "rgb");
  check_sorted(depth, "depth");
  check_sorted(poses, "pose");
  const bool with_depth = !depth.empty();
  const auto depth_of = with_depth ? greedy_match(rgb, depth, tolerance)
                                   : std::vector<std::size_t>(rgb.size(), 0);
  const auto pose_of = greedy_match(rgb, poses, tolerance);

  SequenceIndex index;
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    if (depth_of[i] == std::string::npos || pose_of[i] == std::string::npos) continue;
    SequenceEntry e;
    e.timestamp = rgb[i].timestamp;
    e.rgb = rgb[i].path;
    if (with_depth) e.depth = depth[depth_of[i]].path;
    e.pose = poses[pose_of[i]].pose;
    index.entries.push_back(std::move(e));
  }
  index.dropped_rgb = rgb.size() - index.entries.size();
  index.dropped_depth = with_depth ? depth.size() - index.entries.size() : 0;
  index.dropped_poses = poses.size() - index.entries.size();
  if (index.entries.empty()) throw EmptyResult("no rgb/depth/pose triple matched in time");
  return index;
}

SequenceIndex load_tum_sequence(const std::filesystem::path& root, double tolerance) {
  auto open = [&](const char* name) {
    std::ifstream in(root / name);
    if (!in) throw IoError("cannot read " + (root / name).string());
    return in;
  };
  std::ifstream rgb_in = open("rgb.txt");
  std::ifstream pose_in = open("groundtruth.txt");
  std::vector<TimedPath> depth;
  if (std::filesystem::exists(root / "depth.txt")) {
    std::ifstream depth_in = open("depth.txt");
    depth = parse_file_list(depth_in);
  }
  SequenceIndex index =
      associate(parse_file_list(rgb_in), depth, parse_pose_list(pose_in), tolerance);
  index.intrinsics = load_intrinsics(root / "intrinsics.txt");
  index.root = root;
  return index;
}

Frame load_frame(const SequenceIndex& index, std::size_t i) {
  if (i >= index.entries.size()) throw EmptyResult("sequence entry out of range");
  const SequenceEntry& e = index.entries[i];
  Frame f;
  f.image = read_png_rgb(index.root / e.rgb);
  f.pose = e.pose;
  f.intrinsics = index.intrinsics;
  f.id = std::filesystem::path(e.rgb).stem().string();
  f.validate();
  return f;
}

DepthMap load_ground_truth(const SequenceIndex& index, std::size_t i, double scale) {
  if (i >= index.entries.size()) throw EmptyResult("sequence entry out of range");
  const SequenceEntry& e = index.entries[i];
  if (e.depth.empty()) throw EmptyResult("sequence has no depth images");
  return load_depth_png(index.root / e.depth, scale);
}

void write_pose_list(const std::vector<TimedPose>& poses, std::ostream& out) {
  out << "# timestamp tx ty tz qx qy qz qw\n" << std::setprecision(17);
  for (const auto& p : poses) {
    const Eigen::Quaterniond q = p.pose.quaternion();
    const Vec3& t = p.pose.translation();
    out << p.timestamp << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' '
        << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
  }
}

}  // namespace mvdepth::io
