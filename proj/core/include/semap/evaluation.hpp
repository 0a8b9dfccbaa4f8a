#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "semap/dataset.hpp"
#include "semap/gt_fusion.hpp"
#include "semap/metrics.hpp"
#include "semap/tcl.hpp"

namespace semap {

// (keyframe id, point index within that keyframe)
using PointKey = std::pair<int, std::size_t>;

using LabelTable = std::map<PointKey, PointLabel>;
using GroundTruthTable = std::map<PointKey, GroundTruth>;

// labels.txt: "kf_id point_index label" with -1 for unlabeled.
std::string formatLabels(const SequenceDataset& ds, const LabelAssignment& labels);
LabelTable readLabels(const std::filesystem::path& path);

// gt_assignments.txt: "kf_id point_index gt_label_or_-1 reason".
std::string formatGroundTruth(const SequenceDataset& ds, const GroundTruthAssignment& gt);
GroundTruthTable readGroundTruth(const std::filesystem::path& path);

// Adds one point: skipped when the ground truth is excluded; unlabeled or
// non-evaluated predictions go through accumulateUnlabeled.
void accumulatePoint(ConfusionMatrix& cm, const PointLabel& predicted, const GroundTruth& gt);

// Joins on point key. Throws FormatError when a ground-truth point has no
// prediction.
ConfusionMatrix evaluate(const LabelTable& predicted, const GroundTruthTable& gt, const ClassPalette& palette);

// In-memory variant over assignments of one dataset.
ConfusionMatrix evaluate(const LabelAssignment& predicted, const GroundTruthAssignment& gt,
                         const ClassPalette& palette);

}  // namespace semap
