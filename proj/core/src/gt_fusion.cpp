#include "semap/gt_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "semap/errors.hpp"
#include "semap/parallel.hpp"

namespace semap {

std::vector<LidarProjection> projectLidar(const LidarScan& scan, const CameraIntrinsics& intrinsics, double max_range,
                                          const ProjectionConfig& cfg) {
  std::vector<LidarProjection> out;
  out.reserve(scan.points.size());
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const LidarPoint& lp = scan.points[i];
    const Vec3 p(lp.x, lp.y, lp.z);
    if (!(p.z() > 0.0) || p.z() > max_range) continue;
    const auto proj = project(p, intrinsics, {0.0, cfg.margin});
    if (!proj) continue;
    out.push_back(LidarProjection{proj->pixel, p.z(), lp.label, i});
  }
  return out;
}

ProjectionIndex::ProjectionIndex(std::vector<LidarProjection> projections, const CameraIntrinsics& intrinsics,
                                 double cell_px)
    : projections_(std::move(projections)), cell_px_(cell_px) {
  if (!(cell_px > 0.0)) throw std::invalid_argument("cell size must be positive");
  cols_ = static_cast<int>(std::ceil((intrinsics.width + 1) / cell_px_)) + 1;
  rows_ = static_cast<int>(std::ceil((intrinsics.height + 1) / cell_px_)) + 1;
  cells_.resize(static_cast<std::size_t>(cols_) * rows_);
  for (std::size_t i = 0; i < projections_.size(); ++i) {
    const int cx = std::clamp(static_cast<int>(std::floor(projections_[i].pixel.u / cell_px_)), 0, cols_ - 1);
    const int cy = std::clamp(static_cast<int>(std::floor(projections_[i].pixel.v / cell_px_)), 0, rows_ - 1);
    cells_[static_cast<std::size_t>(cy) * cols_ + cx].push_back(i);
  }
}

std::optional<LidarProjection> ProjectionIndex::nearest(const Pixel& q, double radius_px) const {
  const int x0 = std::max(0, static_cast<int>(std::floor((q.u - radius_px) / cell_px_)));
  const int x1 = std::min(cols_ - 1, static_cast<int>(std::floor((q.u + radius_px) / cell_px_)));
  const int y0 = std::max(0, static_cast<int>(std::floor((q.v - radius_px) / cell_px_)));
  const int y1 = std::min(rows_ - 1, static_cast<int>(std::floor((q.v + radius_px) / cell_px_)));
  const double r2 = radius_px * radius_px;
  const LidarProjection* best = nullptr;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      for (std::size_t i : cells_[static_cast<std::size_t>(y) * cols_ + x]) {
        const LidarProjection& c = projections_[i];
        const double du = c.pixel.u - q.u;
        const double dv = c.pixel.v - q.v;
        const double d2 = du * du + dv * dv;
        if (d2 > r2) continue;
        if (d2 < best_d2 || (d2 == best_d2 && c.index < best->index)) {
          best = &c;
          best_d2 = d2;
        }
      }
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

void GtFusionConfig::validate() const {
  if (!(max_range > 0.0) || !(radius_px >= 0.0) || !(depth_tol_rel >= 0.0)) {
    throw std::invalid_argument("gt fusion: max_range must be > 0, radius and depth tolerance >= 0");
  }
}

Match2d match2d(const SparsePoint& point, const ProjectionIndex& index, const GtFusionConfig& cfg) {
  const auto candidate = index.nearest(point.pixel(), cfg.radius_px);
  if (!candidate) return {MatchStatus::kNoMatch, kVoidClass, 0.0};
  const double z_point = 1.0 / point.inv_depth;
  const double rel = std::abs(candidate->depth - z_point) / candidate->depth;
  if (rel > cfg.depth_tol_rel) return {MatchStatus::kDepthReject, candidate->label, candidate->depth};
  return {MatchStatus::kMatched, candidate->label, candidate->depth};
}

const char* toString(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::kNone: return "ok";
    case ExclusionReason::kTooFar: return "too_far";
    case ExclusionReason::kNoMatch: return "no_match";
    case ExclusionReason::kDepthReject: return "depth_reject";
    case ExclusionReason::kVoid: return "void";
    case ExclusionReason::kInconsistent2d3d: return "inconsistent_2d3d";
  }
  return "unknown";
}

std::optional<ExclusionReason> exclusionReasonFromString(const std::string& s) {
  for (ExclusionReason r : {ExclusionReason::kNone, ExclusionReason::kTooFar, ExclusionReason::kNoMatch,
                            ExclusionReason::kDepthReject, ExclusionReason::kVoid,
                            ExclusionReason::kInconsistent2d3d}) {
    if (s == toString(r)) return r;
  }
  return std::nullopt;
}

std::size_t GroundTruthAssignment::size() const {
  std::size_t n = 0;
  for (const auto& kf : points) n += kf.size();
  return n;
}

GroundTruth fuseLabels(const Match2d& match, ClassId gt2d_label, const ClassPalette& palette) {
  switch (match.status) {
    case MatchStatus::kNoMatch: return {std::nullopt, ExclusionReason::kNoMatch};
    case MatchStatus::kDepthReject: return {std::nullopt, ExclusionReason::kDepthReject};
    case MatchStatus::kMatched: break;
  }
  const bool label3d_ok = match.label < kVoidClass && palette.isEvalIncluded(static_cast<ClassId>(match.label));
  if (!label3d_ok || !palette.isEvalIncluded(gt2d_label)) return {std::nullopt, ExclusionReason::kVoid};
  if (match.label != gt2d_label) return {std::nullopt, ExclusionReason::kInconsistent2d3d};
  return {gt2d_label, ExclusionReason::kNone};
}

GroundTruthAssignment fuseGroundTruth(const SequenceDataset& ds, const GtFusionConfig& cfg, unsigned threads) {
  cfg.validate();
  for (const Keyframe& kf : ds.keyframes) {
    if (kf.points.empty()) continue;
    if (!kf.lidar) throw ConfigError("keyframe " + std::to_string(kf.id) + " has no LiDAR scan (lidar/)");
    if (!kf.gt2d) throw ConfigError("keyframe " + std::to_string(kf.id) + " has no 2D ground truth (gt2d/)");
  }

  GroundTruthAssignment out;
  out.points.resize(ds.keyframes.size());
  parallelFor(ds.keyframes.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Keyframe& kf = ds.keyframes[k];
      auto& slots = out.points[k];
      slots.resize(kf.points.size());
      if (kf.points.empty()) continue;
      const ProjectionIndex index(projectLidar(*kf.lidar, ds.rig.intrinsics, cfg.max_range), ds.rig.intrinsics);
      for (std::size_t i = 0; i < kf.points.size(); ++i) {
        const SparsePoint& p = kf.points[i];
        if (1.0 / p.inv_depth > cfg.max_range) {
          slots[i] = {std::nullopt, ExclusionReason::kTooFar};
          continue;
        }
        slots[i] = fuseLabels(match2d(p, index, cfg), sampleLabel(*kf.gt2d, p.pixel()), ds.palette);
      }
    }
  });
  return out;
}

}  // namespace semap
