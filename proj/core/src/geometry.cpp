#include "semap/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

namespace semap {

bool CameraIntrinsics::isValid() const {
  return std::isfinite(fx) && std::isfinite(fy) && fx > 0.0 && fy > 0.0 && width > 0 && height > 0 &&
         cx > 0.0 && cx < width && cy > 0.0 && cy < height;
}

void CameraIntrinsics::validate() const {
  if (!isValid()) {
    throw std::invalid_argument("invalid intrinsics: fx=" + std::to_string(fx) + " fy=" + std::to_string(fy) +
                                " cx=" + std::to_string(cx) + " cy=" + std::to_string(cy) +
                                " size=" + std::to_string(width) + "x" + std::to_string(height));
  }
}

bool CameraIntrinsics::contains(const Pixel& p) const {
  return p.u >= 0.0 && p.v >= 0.0 && p.u <= width - 1 && p.v <= height - 1;
}

void StereoRig::validate() const {
  intrinsics.validate();
  if (!(baseline > 0.0) || !std::isfinite(baseline)) {
    throw std::invalid_argument("stereo baseline must be positive, got " + std::to_string(baseline));
  }
}

Pose Pose::fromRowMajor(const std::array<double, 12>& m) {
  Mat3 r;
  r << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
  return Pose(r, Vec3(m[3], m[7], m[11]));
}

std::array<double, 12> Pose::toRowMajor() const {
  const Mat3& r = rotation_;
  const Vec3& t = translation_;
  return {r(0, 0), r(0, 1), r(0, 2), t.x(), r(1, 0), r(1, 1), r(1, 2), t.y(), r(2, 0), r(2, 1), r(2, 2), t.z()};
}

bool Pose::isValid(double tol) const {
  if (!rotation_.allFinite() || !translation_.allFinite()) return false;
  const Mat3 gram = rotation_.transpose() * rotation_;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation_.determinant() - 1.0) <= tol;
}

Pose Pose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return Pose(rt, -(rt * translation_));
}

Pose Pose::operator*(const Pose& other) const {
  return Pose(rotation_ * other.rotation_, rotation_ * other.translation_ + translation_);
}

Mat3 rotationFromAxisAngle(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

Vec3 unproject(const Pixel& pixel, double inv_depth, const CameraIntrinsics& intrinsics) {
  if (!(inv_depth > 0.0) || !std::isfinite(inv_depth)) {
    throw std::domain_error("unproject: inverse depth must be positive and finite, got " + std::to_string(inv_depth));
  }
  if (!std::isfinite(pixel.u) || !std::isfinite(pixel.v)) {
    throw std::domain_error("unproject: non-finite pixel");
  }
  const double depth = 1.0 / inv_depth;
  return Vec3((pixel.u - intrinsics.cx) / intrinsics.fx * depth, (pixel.v - intrinsics.cy) / intrinsics.fy * depth,
              depth);
}

bool withinMargin(const Pixel& p, const CameraIntrinsics& intrinsics, double margin) {
  return p.u >= margin && p.v >= margin && p.u <= intrinsics.width - margin && p.v <= intrinsics.height - margin;
}

std::optional<Projection> project(const Vec3& point_cam, const CameraIntrinsics& intrinsics,
                                  const ProjectionConfig& cfg) {
  const double z = point_cam.z();
  if (!(z > cfg.z_min) || !point_cam.allFinite()) return std::nullopt;
  const double inv_z = 1.0 / z;
  Pixel px{intrinsics.fx * point_cam.x() * inv_z + intrinsics.cx, intrinsics.fy * point_cam.y() * inv_z + intrinsics.cy};
  if (!withinMargin(px, intrinsics, cfg.margin)) return std::nullopt;
  return Projection{px, inv_z};
}

Vec3 transform(const Pose& src_world, const Pose& dst_world, const Vec3& point_src) {
  return dst_world.rotation().transpose() *
         (src_world.rotation() * point_src + src_world.translation() - dst_world.translation());
}

std::optional<Projection> projectToRight(const Pixel& left, double inv_depth, const StereoRig& rig,
                                         const ProjectionConfig& cfg) {
  if (!(inv_depth >= 0.0)) return std::nullopt;
  Pixel right{left.u - rig.disparity(inv_depth), left.v};
  if (!withinMargin(right, rig.intrinsics, cfg.margin)) return std::nullopt;
  return Projection{right, inv_depth};
}

}  // namespace semap
