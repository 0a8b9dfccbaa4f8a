#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "semap/covisibility.hpp"
#include "semap/dataset.hpp"

namespace semap {

struct LidarProjection {
  Pixel pixel;
  double depth = 0.0;
  std::uint32_t label = kVoidClass;
  std::size_t index = 0;  // position in the source scan
};

// Keeps points with 0 < z <= max_range that land in the image
// (margin from `cfg`, near plane ignored).
std::vector<LidarProjection> projectLidar(const LidarScan& scan, const CameraIntrinsics& intrinsics,
                                          double max_range = 100.0, const ProjectionConfig& cfg = {0.0, 0.0});

// Uniform-grid bucket index over projected LiDAR points, read-only once built.
class ProjectionIndex {
 public:
  ProjectionIndex(std::vector<LidarProjection> projections, const CameraIntrinsics& intrinsics,
                  double cell_px = 4.0);

  // Nearest projection with distance <= radius_px; equal distances resolve to
  // the lower scan index.
  std::optional<LidarProjection> nearest(const Pixel& query, double radius_px) const;

  std::size_t size() const { return projections_.size(); }

 private:
  std::vector<LidarProjection> projections_;
  std::vector<std::vector<std::size_t>> cells_;
  double cell_px_;
  int cols_ = 0;
  int rows_ = 0;
};

enum class MatchStatus { kMatched, kNoMatch, kDepthReject };

struct Match2d {
  MatchStatus status = MatchStatus::kNoMatch;
  std::uint32_t label = kVoidClass;
  double lidar_depth = 0.0;
};

struct GtFusionConfig {
  double max_range = 100.0;     // meters
  double radius_px = 2.0;
  double depth_tol_rel = 0.1;   // |z_lidar - z_point| / z_lidar

  void validate() const;
};

Match2d match2d(const SparsePoint& point, const ProjectionIndex& index, const GtFusionConfig& cfg);

enum class ExclusionReason { kNone, kTooFar, kNoMatch, kDepthReject, kVoid, kInconsistent2d3d };

const char* toString(ExclusionReason reason);
std::optional<ExclusionReason> exclusionReasonFromString(const std::string& s);

struct GroundTruth {
  std::optional<ClassId> label;  // set iff reason == kNone
  ExclusionReason reason = ExclusionReason::kNone;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

// Per keyframe, parallel to Keyframe::points.
struct GroundTruthAssignment {
  std::vector<std::vector<GroundTruth>> points;

  const GroundTruth& at(const PointRef& ref) const { return points[ref.keyframe][ref.index]; }
  std::size_t size() const;
  friend bool operator==(const GroundTruthAssignment&, const GroundTruthAssignment&) = default;
};

// Combines a 3D match with the 2D ground truth sampled at the host pixel.
// Reasons are decided in the order depth_reject, void, inconsistent_2d3d
// (too_far / no_match are decided before matching).
GroundTruth fuseLabels(const Match2d& match, ClassId gt2d_label, const ClassPalette& palette);

// Full keyframe-wise association over the dataset. Throws ConfigError when a
// keyframe with points lacks a LiDAR scan or a gt2d map.
GroundTruthAssignment fuseGroundTruth(const SequenceDataset& ds, const GtFusionConfig& cfg, unsigned threads = 1);

}  // namespace semap
