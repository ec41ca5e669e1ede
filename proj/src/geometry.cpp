#include "mvdepth/geometry.hpp"

#include "mvdepth/errors.hpp"

#include <cmath>
#include <sstream>

namespace mvdepth {

namespace {

constexpr double kRotationTolerance = 1e-9;

void check_rotation(const Mat3& r) {
  const Mat3 gram = r.transpose() * r;
  if (!((gram - Mat3::Identity()).cwiseAbs().maxCoeff() <= kRotationTolerance)) {
    throw InvalidPose("rotation is not orthonormal");
  }
  if (std::abs(r.determinant() - 1.0) > kRotationTolerance) {
    throw InvalidPose("rotation determinant is not +1");
  }
  if (!r.allFinite()) throw InvalidPose("rotation has non-finite entries");
}

}  // namespace

Pose::Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  check_rotation(rotation_);
  if (!translation_.allFinite()) throw InvalidPose("translation has non-finite entries");
}

Pose::Pose(const Mat3& rotation, const Vec3& translation, Unchecked)
    : rotation_(rotation), translation_(translation) {}

Pose Pose::from_quaternion(double qx, double qy, double qz, double qw,
                           const Vec3& translation) {
  Eigen::Quaterniond q(qw, qx, qy, qz);
  const double norm = q.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidPose("degenerate quaternion");
  q.coeffs() /= norm;
  return Pose(q.toRotationMatrix(), translation);
}

Pose Pose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return Pose(rt, -(rt * translation_), Unchecked{});
}

Pose Pose::operator*(const Pose& rhs) const {
  return Pose(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_,
              Unchecked{});
}

Pose Pose::scaled_translation(double s) const {
  return Pose(rotation_, s * translation_, Unchecked{});
}

Pose relative_pose(const Pose& world_from_m, const Pose& world_from_r) {
  return world_from_m.inverse() * world_from_r;
}

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidIntrinsics("focal lengths must be positive");
  if (width < 1 || height < 1) throw InvalidIntrinsics("image size must be at least 1x1");
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw InvalidIntrinsics("intrinsics must be finite");
  }
}

Mat3 Intrinsics::K() const {
  Mat3 k;
  k << fx, 0.0, cx,
       0.0, fy, cy,
       0.0, 0.0, 1.0;
  return k;
}

Mat3 Intrinsics::K_inverse() const {
  Mat3 k;
  k << 1.0 / fx, 0.0, -cx / fx,
       0.0, 1.0 / fy, -cy / fy,
       0.0, 0.0, 1.0;
  return k;
}

Intrinsics Intrinsics::scaled(double sx, double sy, int new_width, int new_height) const {
  // Pixel centers map as (u + 0.5) * s - 0.5.
  Intrinsics out = *this;
  out.fx = fx * sx;
  out.fy = fy * sy;
  out.cx = (cx + 0.5) * sx - 0.5;
  out.cy = (cy + 0.5) * sy - 0.5;
  out.width = new_width;
  out.height = new_height;
  return out;
}

Vec2 project(const Intrinsics& intr, const Vec3& point) {
  if (!(point.z() > 0.0)) {
    std::ostringstream msg;
    msg << "cannot project point with z = " << point.z();
    throw NonPositiveDepth(msg.str());
  }
  return {intr.fx * point.x() / point.z() + intr.cx, intr.fy * point.y() / point.z() + intr.cy};
}

Vec3 backproject(const Intrinsics& intr, const Vec2& pixel, double depth) {
  if (!(depth > 0.0)) {
    std::ostringstream msg;
    msg << "cannot backproject at depth " << depth;
    throw NonPositiveDepth(msg.str());
  }
  return {(pixel.x() - intr.cx) * depth / intr.fx, (pixel.y() - intr.cy) * depth / intr.fy,
          depth};
}

DepthHypotheses sample_inverse_depths(double d_min, double d_max, std::size_t n) {
  if (!(d_min > 0.0) || !(d_min < d_max) || !std::isfinite(d_max)) {
    throw InvalidRange("depth range must satisfy 0 < d_min < d_max");
  }
  if (n < 2) throw InvalidRange("at least two depth samples are required");

  DepthHypotheses h;
  h.d_min_ = d_min;
  h.d_max_ = d_max;
  const double near_inv = 1.0 / d_min;
  const double far_inv = 1.0 / d_max;
  const double span = near_inv - far_inv;
  const double denom = static_cast<double>(n - 1);
  h.step_ = span / denom;
  h.inverse_depths_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    h.inverse_depths_[i] = span * (static_cast<double>(i) / denom) + far_inv;
  }
  // Endpoints are pinned so they carry no accumulated rounding.
  h.inverse_depths_.front() = far_inv;
  h.inverse_depths_.back() = near_inv;
  return h;
}

DepthHypotheses DepthHypotheses::scaled(double s) const {
  return sample_inverse_depths(d_min_ * s, d_max_ * s, size());
}

std::optional<Vec2> WarpMatrix::apply(const Vec2& pixel) const {
  const Vec3 h = P * Vec3(pixel.x(), pixel.y(), 1.0);
  if (!(h.z() > kMinProjectableDepth)) return std::nullopt;
  return Vec2(h.x() / h.z(), h.y() / h.z());
}

WarpMatrix warp_matrix(const Intrinsics& intr, const Pose& m_from_r, double depth) {
  return warp_matrix(intr, intr, m_from_r, depth);
}

WarpMatrix warp_matrix(const Intrinsics& reference, const Intrinsics& measurement,
                       const Pose& m_from_r, double depth) {
  if (!(depth > 0.0)) throw NonPositiveDepth("warp depth must be positive");
  const Mat3 k_m = measurement.K();
  WarpMatrix w;
  w.P = depth * (k_m * m_from_r.rotation() * reference.K_inverse());
  w.P.col(2) += k_m * m_from_r.translation();
  return w;
}

Mat3 rotation_about(const Vec3& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

}  // namespace mvdepth
