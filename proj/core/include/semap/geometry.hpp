#pragma once

#include <array>
#include <optional>

#include <Eigen/Core>

namespace semap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

// Pinhole intrinsics of a rectified camera. Distortion is assumed removed.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool isValid() const;
  // Throws std::invalid_argument when isValid() is false.
  void validate() const;
  // True when 0 <= u <= width-1 and 0 <= v <= height-1, i.e. rounding yields
  // a valid cell index.
  bool contains(const Pixel& p) const;
};

// Rectified stereo pair. The right camera sits at +baseline along the left
// camera's x axis and shares its intrinsics.
struct StereoRig {
  CameraIntrinsics intrinsics;
  double baseline = 0.0;

  void validate() const;
  double disparity(double inv_depth) const { return intrinsics.fx * baseline * inv_depth; }
};

// Rigid world-from-camera transform: p_world = rotation * p_cam + translation.
class Pose {
 public:
  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  Pose(const Mat3& rotation, const Vec3& translation) : rotation_(rotation), translation_(translation) {}

  // From a row-major 3x4 [R|t] block, the layout used by poses.txt.
  static Pose fromRowMajor(const std::array<double, 12>& m);
  std::array<double, 12> toRowMajor() const;

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  // Orthonormal with det +1 within tol.
  bool isValid(double tol = 1e-9) const;

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Pose inverse() const;
  // (*this) * other: apply other first.
  Pose operator*(const Pose& other) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

// Rotation matrix for an axis-angle vector (radians).
Mat3 rotationFromAxisAngle(const Vec3& axis_angle);

struct ProjectionConfig {
  double z_min = 0.1;   // near plane, meters
  double margin = 1.0;  // pixels kept clear of the image border
};

struct Projection {
  Pixel pixel;
  double inv_depth = 0.0;
};

// Camera-frame point at the given pixel and inverse depth.
// Throws std::domain_error for inv_depth <= 0 or non-finite input.
Vec3 unproject(const Pixel& pixel, double inv_depth, const CameraIntrinsics& intrinsics);

// std::nullopt means NotVisible: behind the near plane or outside
// [margin, width - margin] x [margin, height - margin].
std::optional<Projection> project(const Vec3& point_cam, const CameraIntrinsics& intrinsics,
                                  const ProjectionConfig& cfg = {});

// Moves a point from the camera frame of src to the camera frame of dst.
Vec3 transform(const Pose& src_world, const Pose& dst_world, const Vec3& point_src);

// Rectified left-to-right transfer: shifts u by the disparity, keeps v and
// inverse depth.
std::optional<Projection> projectToRight(const Pixel& left, double inv_depth, const StereoRig& rig,
                                         const ProjectionConfig& cfg = {});

bool withinMargin(const Pixel& p, const CameraIntrinsics& intrinsics, double margin);

}  // namespace semap
