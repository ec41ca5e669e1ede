#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <optional>
#include <vector>

namespace mvdepth {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Points whose depth in the target camera does not exceed this are treated
/// as behind the camera.
inline constexpr double kMinProjectableDepth = 1e-9;

/// Rigid transform T = [R t; 0 1]. A pose named `world_from_camera` maps
/// camera coordinates to world coordinates.
class Pose {
 public:
  Pose();  // identity

  /// Throws InvalidPose unless `rotation` is orthonormal with det +1 (1e-9).
  Pose(const Mat3& rotation, const Vec3& translation);

  /// Quaternion in (x, y, z, w) order as stored in TUM pose files. The
  /// quaternion is normalized before conversion.
  static Pose from_quaternion(double qx, double qy, double qz, double qw,
                              const Vec3& translation);

  static Pose identity() { return Pose(); }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(rotation_); }

  Pose inverse() const;
  Pose operator*(const Pose& rhs) const;
  Vec3 operator*(const Vec3& point) const { return rotation_ * point + translation_; }

  /// Same rotation, translation multiplied by `s`.
  Pose scaled_translation(double s) const;

 private:
  struct Unchecked {};
  Pose(const Mat3& rotation, const Vec3& translation, Unchecked);

  Mat3 rotation_;
  Vec3 translation_;
};

/// T_{m,r} = T_{w,m}^-1 T_{w,r}: maps reference-camera points into the
/// measurement camera.
Pose relative_pose(const Pose& world_from_m, const Pose& world_from_r);

/// Pinhole camera without distortion.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws InvalidIntrinsics on non-positive focal length or image size.
  void validate() const;

  Mat3 K() const;
  Mat3 K_inverse() const;

  /// Intrinsics of the same camera after resizing the image by `sx`, `sy`.
  Intrinsics scaled(double sx, double sy, int new_width, int new_height) const;

  bool operator==(const Intrinsics&) const = default;
};

/// Throws NonPositiveDepth when point.z() <= 0.
Vec2 project(const Intrinsics& intr, const Vec3& point);

/// Throws NonPositiveDepth when depth <= 0.
Vec3 backproject(const Intrinsics& intr, const Vec2& pixel, double depth);

/// Depth hypotheses uniformly spaced in inverse depth, ascending in inverse
/// depth (index 0 is the farthest plane, d_max).
class DepthHypotheses {
 public:
  DepthHypotheses() = default;

  double d_min() const { return d_min_; }
  double d_max() const { return d_max_; }
  std::size_t size() const { return inverse_depths_.size(); }
  const std::vector<double>& inverse_depths() const { return inverse_depths_; }
  double inverse_depth(std::size_t i) const { return inverse_depths_[i]; }
  double depth(std::size_t i) const { return 1.0 / inverse_depths_[i]; }
  /// Spacing between consecutive inverse depths.
  double step() const { return step_; }

  /// Same sampling with every depth multiplied by `s`.
  DepthHypotheses scaled(double s) const;

  friend DepthHypotheses sample_inverse_depths(double d_min, double d_max, std::size_t n);

 private:
  double d_min_ = 0.0;
  double d_max_ = 0.0;
  double step_ = 0.0;
  std::vector<double> inverse_depths_;
};

/// i-th value = (1/d_min - 1/d_max) * i/(n-1) + 1/d_max. Throws InvalidRange
/// unless 0 < d_min < d_max and n >= 2.
DepthHypotheses sample_inverse_depths(double d_min, double d_max, std::size_t n);

/// 3x3 homography of the fronto-parallel plane at `depth` in the reference
/// camera: P = d K R K^-1 + [0 | 0 | K t]. Applied to a homogeneous reference
/// pixel, the third coordinate of P u is the point's depth in the measurement
/// camera.
struct WarpMatrix {
  Mat3 P;

  /// lambda(P [u v 1]^T), or nullopt when the warped point lies at or behind
  /// the measurement camera plane.
  std::optional<Vec2> apply(const Vec2& pixel) const;
};

WarpMatrix warp_matrix(const Intrinsics& intr, const Pose& m_from_r, double depth);

/// Variant for cameras with different intrinsics:
/// P = d K_m R K_r^-1 + [0 | 0 | K_m t].
WarpMatrix warp_matrix(const Intrinsics& reference, const Intrinsics& measurement,
                       const Pose& m_from_r, double depth);

/// Axis-angle helper used by trajectories and tests.
Mat3 rotation_about(const Vec3& axis, double angle_rad);

}  // namespace mvdepth
