#include "semap/covisibility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "semap/errors.hpp"

namespace semap {

namespace {

void emit(CoVisibleSet& set, const LabelMap* labels, std::size_t frame, Side side, const Projection& proj) {
  if (labels == nullptr || labels->empty()) return;
  // Margins below half a pixel can round onto the row/column past the border.
  const double ur = std::round(proj.pixel.u);
  const double vr = std::round(proj.pixel.v);
  if (ur < 0.0 || vr < 0.0 || ur >= labels->width() || vr >= labels->height()) return;
  const ClassId label = sampleLabel(*labels, proj.pixel);
  if (label == kVoidClass) return;
  set.observations.push_back(Observation{frame, side, proj.pixel, proj.inv_depth, label});
}

}  // namespace

CoVisibleSet covisibleSet(const PointRef& ref, const SequenceDataset& ds, const CovisibilityConfig& cfg) {
  if (cfg.window < 0) throw std::invalid_argument("covisibility window must be >= 0");
  if (ref.keyframe >= ds.keyframes.size() || ref.index >= ds.keyframes[ref.keyframe].points.size()) {
    throw std::invalid_argument("covisibility: point reference out of range");
  }
  const bool stereo = cfg.mode == StereoMode::kStereo;
  if (stereo && !ds.hasRightLabels()) {
    throw ConfigError("stereo mode requires right label maps (labels/right/) for every keyframe");
  }

  const Keyframe& host = ds.keyframes[ref.keyframe];
  const SparsePoint& point = host.points[ref.index];
  const CameraIntrinsics& intr = ds.rig.intrinsics;
  const Vec3 p_host = unproject(point.pixel(), point.inv_depth, intr);

  const std::size_t w = static_cast<std::size_t>(cfg.window);
  const std::size_t first = ref.keyframe > w ? ref.keyframe - w : 0;
  const std::size_t last = std::min(ds.keyframes.size() - 1, ref.keyframe + w);

  CoVisibleSet set;
  set.point = ref;
  set.observations.reserve(2 * (last - first + 1));
  for (std::size_t j = first; j <= last; ++j) {
    const Keyframe& target = ds.keyframes[j];
    Projection left;
    if (j == ref.keyframe) {
      left = Projection{point.pixel(), point.inv_depth};
    } else {
      const auto proj = project(transform(host.pose, target.pose, p_host), intr, cfg.projection);
      if (!proj) continue;
      left = *proj;
    }
    emit(set, &target.labels_left, j, Side::kLeft, left);
    if (stereo) {
      if (const auto right = projectToRight(left.pixel, left.inv_depth, ds.rig, cfg.projection)) {
        emit(set, target.labels_right ? &*target.labels_right : nullptr, j, Side::kRight, *right);
      }
    }
  }
  return set;
}

}  // namespace semap
