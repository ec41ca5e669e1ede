#pragma once

#include "mvdepth/cost_volume.hpp"
#include "mvdepth/geometry.hpp"
#include "mvdepth/image.hpp"
#include "mvdepth/io/image_io.hpp"

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace mvdepth::io {

inline constexpr double kDefaultAssociationTolerance = 0.02;  // seconds

struct TimedPath {
  double timestamp = 0.0;
  std::string path;
};

struct TimedPose {
  double timestamp = 0.0;
  Pose pose;  // world_from_camera
};

/// `timestamp filename` rows of rgb.txt / depth.txt. Throws FormatError.
std::vector<TimedPath> parse_file_list(std::istream& in);
/// `timestamp tx ty tz qx qy qz qw` rows. Throws FormatError or InvalidPose.
std::vector<TimedPose> parse_pose_list(std::istream& in);

struct SequenceEntry {
  double timestamp = 0.0;  // of the rgb image
  std::string rgb;
  std::string depth;  // empty when the sequence has no depth stream
  Pose pose;
};

struct SequenceIndex {
  std::vector<SequenceEntry> entries;  // strictly increasing timestamps
  Intrinsics intrinsics;
  std::filesystem::path root;
  std::size_t dropped_rgb = 0;
  std::size_t dropped_depth = 0;
  std::size_t dropped_poses = 0;
};

/// Matches each rgb entry to a depth entry and a pose by greedy nearest
/// timestamp: candidate pairs within `tolerance` are taken in order of
/// increasing time difference, each entry used at most once. An empty depth
/// list associates rgb with poses only. Throws EmptyResult.
SequenceIndex associate(const std::vector<TimedPath>& rgb, const std::vector<TimedPath>& depth,
                        const std::vector<TimedPose>& poses,
                        double tolerance = kDefaultAssociationTolerance);

/// Reads rgb.txt, depth.txt (optional), groundtruth.txt and intrinsics.txt
/// from `root`.
SequenceIndex load_tum_sequence(const std::filesystem::path& root,
                                double tolerance = kDefaultAssociationTolerance);

/// Entry `i` as a frame with raw intensities in [0, 1]. The id is the rgb
/// file name without extension.
Frame load_frame(const SequenceIndex& index, std::size_t i);

/// Depth image of entry `i`. Throws EmptyResult when the sequence has no
/// depth stream.
DepthMap load_ground_truth(const SequenceIndex& index, std::size_t i, double scale = kTumDepthScale);

void write_pose_list(const std::vector<TimedPose>& poses, std::ostream& out);

}  // namespace mvdepth::io
