#pragma once

#include <cstddef>
#include <vector>

#include "semap/dataset.hpp"
#include "semap/geometry.hpp"

namespace semap {

enum class StereoMode { kMono, kStereo };

// One labeled sighting of a sparse point in a keyframe image.
struct Observation {
  std::size_t frame = 0;  // index into SequenceDataset::keyframes
  Side side = Side::kLeft;
  Pixel pixel;
  double inv_depth_local = 0.0;  // inverse depth of the point in frame `frame`
  ClassId label = kVoidClass;
};

struct PointRef {
  std::size_t keyframe = 0;  // index into SequenceDataset::keyframes
  std::size_t index = 0;     // index into Keyframe::points
};

struct CoVisibleSet {
  PointRef point;
  std::vector<Observation> observations;
};

struct CovisibilityConfig {
  int window = 7;  // keyframes on each side of the host
  StereoMode mode = StereoMode::kStereo;
  ProjectionConfig projection;
};

// Projects the point into every keyframe within +-window of its host (sequence
// positions, host included) and, in stereo mode, on into the right image.
// Observations are ordered by frame, left before right; void samples are
// dropped. The host observation uses the stored pixel and inverse depth
// directly, so it is present whenever the host label is non-void.
//
// Throws ConfigError for stereo mode on a dataset without right labels and
// std::invalid_argument for a negative window or a bad point reference.
CoVisibleSet covisibleSet(const PointRef& point, const SequenceDataset& ds, const CovisibilityConfig& cfg);

}  // namespace semap
