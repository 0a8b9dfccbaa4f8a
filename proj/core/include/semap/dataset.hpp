#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semap/geometry.hpp"
#include "semap/image.hpp"

namespace semap {

// A point tracked by the odometry front-end, fixed at a pixel of its host
// keyframe's left image.
struct SparsePoint {
  int host_kf = 0;
  double u = 0.0;
  double v = 0.0;
  double inv_depth = 0.0;

  Pixel pixel() const { return {u, v}; }
  friend bool operator==(const SparsePoint&, const SparsePoint&) = default;
};

struct LidarPoint {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  std::uint32_t label = kVoidClass;

  friend bool operator==(const LidarPoint&, const LidarPoint&) = default;
};

// Labeled scan expressed in its keyframe's left-camera frame.
struct LidarScan {
  std::vector<LidarPoint> points;
  friend bool operator==(const LidarScan&, const LidarScan&) = default;
};

struct ClassInfo {
  ClassId id = 0;
  std::string name;
  std::array<std::uint8_t, 3> rgb{0, 0, 0};
  bool eval_included = true;

  friend bool operator==(const ClassInfo&, const ClassInfo&) = default;
};

// Classes 0..C-1, plus an optional entry for the void id 255 (display only).
class ClassPalette {
 public:
  ClassPalette() = default;
  // Throws std::invalid_argument when the invariants do not hold.
  explicit ClassPalette(std::vector<ClassInfo> classes);

  std::size_t classCount() const { return classes_.size(); }
  const std::vector<ClassInfo>& classes() const { return classes_; }
  const ClassInfo& at(ClassId id) const { return classes_.at(id); }

  bool isEvalIncluded(ClassId id) const { return id < classes_.size() && classes_[id].eval_included; }
  std::vector<bool> evalMask() const;
  std::optional<ClassId> findByName(const std::string& name) const;

  std::array<std::uint8_t, 3> color(ClassId id) const;
  const std::optional<ClassInfo>& voidEntry() const { return void_entry_; }

  friend bool operator==(const ClassPalette&, const ClassPalette&) = default;

 private:
  std::vector<ClassInfo> classes_;
  std::optional<ClassInfo> void_entry_;
};

struct Keyframe {
  int id = 0;
  Pose pose;
  std::vector<SparsePoint> points;
  LabelMap labels_left;
  std::optional<LabelMap> labels_right;
  std::optional<GrayImage> image_left;
  std::optional<GrayImage> image_right;
  std::optional<LidarScan> lidar;
  std::optional<LabelMap> gt2d;
};

class SequenceDataset {
 public:
  StereoRig rig;
  ClassPalette palette;
  std::vector<Keyframe> keyframes;

  // False when any keyframe lacks a right label map; stereo labeling then refuses to run.
  bool hasRightLabels() const;
  bool hasImages() const;
  bool hasRightImages() const;
  std::size_t pointCount() const;

  // Checks every cross-file invariant; throws FormatError naming the problem.
  void validate() const;
};

// Sequence directory I/O. See README for the layout.
SequenceDataset loadSequence(const std::filesystem::path& dir);
void saveSequence(const SequenceDataset& ds, const std::filesystem::path& dir);

ClassPalette loadPalette(const std::filesystem::path& path);
void savePalette(const ClassPalette& palette, const std::filesystem::path& path);

LidarScan readLidarBin(const std::filesystem::path& path);
void writeLidarBin(const std::filesystem::path& path, const LidarScan& scan);

}  // namespace semap
