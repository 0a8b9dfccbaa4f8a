#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semap/dataset.hpp"
#include "semap/image.hpp"

namespace semap {

// C x C counts, rows = predicted class, columns = ground truth. Only classes
// in the evaluation mask may be accumulated. Mergeable by entrywise sum.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t class_count);
  ConfusionMatrix(std::size_t class_count, std::vector<bool> eval_mask);
  static ConfusionMatrix forPalette(const ClassPalette& palette);

  std::size_t classCount() const { return n_; }
  bool isEval(ClassId c) const { return c < n_ && eval_[c]; }

  // Throws std::invalid_argument for ids outside the evaluation set.
  void accumulate(ClassId predicted, ClassId gt);
  // Unlabeled prediction; only counted as a false negative in strict mode.
  void accumulateUnlabeled(ClassId gt);
  void merge(const ConfusionMatrix& other);

  std::uint64_t count(ClassId predicted, ClassId gt) const { return counts_[predicted * n_ + gt]; }
  std::uint64_t truePositives(ClassId c) const { return count(c, c); }
  std::uint64_t rowSum(ClassId c) const;  // N_c, points predicted as c
  std::uint64_t colSum(ClassId c) const;
  std::uint64_t unlabeled(ClassId gt) const { return unlabeled_[gt]; }
  std::uint64_t trace() const;
  std::uint64_t total() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<bool> eval_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> unlabeled_;
};

struct MetricOptions {
  bool strict = false;  // unlabeled predictions count as false negatives
};

std::optional<double> iou(const ConfusionMatrix& cm, ClassId c, const MetricOptions& opt = {});
std::optional<double> classAccuracy(const ConfusionMatrix& cm, ClassId c);
std::optional<double> overallAccuracy(const ConfusionMatrix& cm);

struct MeanIou {
  std::optional<double> value;          // mean over defined eval classes
  std::vector<ClassId> undefined;       // eval classes with a zero denominator
};

MeanIou meanIou(const ConfusionMatrix& cm, const MetricOptions& opt = {});

// Per-class IoU / accuracy in percent with one decimal, then mIoU and OA.
// Undefined classes show n/a and are marked with '*'.
std::string formatReport(const ConfusionMatrix& cm, const ClassPalette& palette, const MetricOptions& opt = {});

// Machine-readable: "class_id iou acc" per eval class, then "miou x" and
// "oa x"; fractions with 6 decimals, "nan" when undefined.
std::string formatMetricsFile(const ConfusionMatrix& cm, const MetricOptions& opt = {});

}  // namespace semap
