#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "semap/covisibility.hpp"
#include "semap/dataset.hpp"

namespace semap {

// Point label; std::nullopt is Unlabeled (no evidence).
using PointLabel = std::optional<ClassId>;

// Accumulated inverse-depth votes, one slot per class.
class VoteSet {
 public:
  explicit VoteSet(std::size_t class_count) : weights_(class_count, 0.0) {}

  std::size_t classCount() const { return weights_.size(); }
  double operator[](ClassId c) const { return weights_[c]; }
  const std::vector<double>& weights() const { return weights_; }
  double total() const;

  // Throws std::out_of_range for c >= classCount().
  void add(ClassId c, double weight);

 private:
  std::vector<double> weights_;
};

enum class TieBreak {
  kHostThenLowestId,  // host label if among the maxima, else the lowest id
  kLowestId,
};

struct TclConfig {
  double dist_min = 3.0;  // meters; 0 disables the near cutoff
  int window = 7;
  StereoMode mode = StereoMode::kStereo;
  TieBreak tie_break = TieBreak::kHostThenLowestId;
  ProjectionConfig projection;

  void validate() const;
  // Observation accepted iff inv_depth < 1 / dist_min (strict), or dist_min == 0.
  bool accepts(double inv_depth) const { return dist_min == 0.0 || inv_depth < 1.0 / dist_min; }
  CovisibilityConfig covisibility() const { return {window, mode, projection}; }
};

VoteSet accumulateVotes(const CoVisibleSet& set, std::size_t class_count, const TclConfig& cfg);

PointLabel assignLabel(const VoteSet& votes, PointLabel host_label, const TclConfig& cfg);

// Single-frame prediction: the host left label at the point's pixel.
PointLabel baselineLabel(const PointRef& point, const SequenceDataset& ds);

// Labels per keyframe, parallel to Keyframe::points.
struct LabelAssignment {
  std::vector<std::vector<PointLabel>> labels;

  const PointLabel& at(const PointRef& ref) const { return labels[ref.keyframe][ref.index]; }
  std::size_t size() const;
  friend bool operator==(const LabelAssignment&, const LabelAssignment&) = default;
};

// Temporally consistent labels for every point. Work is split over `threads`
// workers (0 = hardware concurrency); the result does not depend on it.
LabelAssignment labelAllPoints(const SequenceDataset& ds, const TclConfig& cfg, unsigned threads = 1);

LabelAssignment baselineLabels(const SequenceDataset& ds);

}  // namespace semap
