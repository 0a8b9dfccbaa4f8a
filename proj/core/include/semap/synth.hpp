#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semap/dataset.hpp"
#include "semap/geometry.hpp"

namespace semap::synth {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TextureKind { kConstant, kRamp, kChecker };

// Intensity as a function of the world position of a surface point.
struct Texture {
  TextureKind kind = TextureKind::kConstant;
  double base = 128.0;
  Vec3 gradient = Vec3::Zero();  // ramp: intensity per meter
  double cell = 1.0;             // checker: cell edge in meters
  double amplitude = 0.0;        // checker: +-amplitude around base

  double intensity(const Vec3& world) const;

  static Texture constant(double base) { return {TextureKind::kConstant, base, Vec3::Zero(), 1.0, 0.0}; }
  static Texture ramp(double base, const Vec3& gradient) { return {TextureKind::kRamp, base, gradient, 1.0, 0.0}; }
  static Texture checker(double base, double amplitude, double cell) {
    return {TextureKind::kChecker, base, Vec3::Zero(), cell, amplitude};
  }
};

// Plane {x_axis = offset} bounded to a rectangle in the two other axes
// (listed in increasing axis order).
struct AxisPlane {
  int axis = 2;
  double offset = 0.0;
  Eigen::Vector2d lo{-1e300, -1e300};
  Eigen::Vector2d hi{1e300, 1e300};
  ClassId label = 0;
  Texture texture;
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
  ClassId label = 0;
  Texture texture;
};

struct SceneSpec {
  std::vector<AxisPlane> planes;
  std::vector<Box> boxes;

  // Throws std::invalid_argument for degenerate primitives or ids >= class_count.
  void validate(std::size_t class_count) const;
};

struct SurfaceHit {
  double t = 0.0;  // ray parameter; equals camera depth for directions with unit z in camera frame
  Vec3 point = Vec3::Zero();
  ClassId label = kVoidClass;
  double intensity = 0.0;
};

// Nearest intersection with t > 1e-9, or std::nullopt (sky).
std::optional<SurfaceHit> castRay(const SceneSpec& scene, const Vec3& origin, const Vec3& direction);

struct GeneratorOptions {
  std::size_t points_per_kf = 1000;
  std::uint64_t seed = 1;
  bool render_images = false;
  bool render_right_images = false;
  std::size_t lidar_points_per_kf = 0;
  // Keep only points whose rounded projection lands on their own class in
  // every keyframe and side where they are visible (no occlusion, off boundaries).
  bool consistent_points = true;
  // Keep only points whose host label neighbourhood of this Chebyshev radius
  // holds a single class (0 = off).
  int boundary_clearance_px = 0;
  int point_border = 4;  // pixels kept clear for residual patterns
  ProjectionConfig projection;
};

struct GeneratedSequence {
  SequenceDataset dataset;
  std::vector<std::vector<ClassId>> true_labels;  // parallel to keyframe points
};

// Ray-casts exact points, label maps (left, right, gt2d) and optional images
// and LiDAR scans. Throws GenerationError naming the keyframe when the point
// budget cannot be met.
GeneratedSequence generate(const SceneSpec& scene, const std::vector<Pose>& trajectory, const StereoRig& rig,
                           const ClassPalette& palette, const GeneratorOptions& options);

struct NoiseModel {
  double flip_rate = 0.0;
  int boundary_band_px = 0;
  double boundary_flip_rate = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct CorruptionStats {
  std::size_t eligible = 0;  // non-void pixels considered
  std::size_t flipped = 0;
};

// Replaces non-void prediction pixels (left and right maps) with a uniformly
// drawn wrong class at the configured rates. gt2d maps are not touched.
// Deterministic for a given seed.
SequenceDataset corrupt(const SequenceDataset& ds, const NoiseModel& noise, CorruptionStats* stats = nullptr);

enum class ScenePreset { kPlane, kStreet, kBoxes };

std::optional<ScenePreset> presetFromString(const std::string& name);

struct SceneSetup {
  SceneSpec scene;
  std::vector<Pose> trajectory;
  StereoRig rig;
  ClassPalette palette;
};

// Ten eval classes: road sidewalk building wall fence pole traffic_sign
// vegetation car terrain, plus a display entry for void.
ClassPalette defaultPalette();

SceneSetup makePreset(ScenePreset preset, std::size_t keyframes);

}  // namespace semap::synth
