#include "semap/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace semap {

ConfusionMatrix::ConfusionMatrix(std::size_t class_count) : ConfusionMatrix(class_count, std::vector<bool>(class_count, true)) {}

ConfusionMatrix::ConfusionMatrix(std::size_t class_count, std::vector<bool> eval_mask)
    : n_(class_count), eval_(std::move(eval_mask)), counts_(class_count * class_count, 0), unlabeled_(class_count, 0) {
  if (class_count == 0 || class_count > kVoidClass) throw std::invalid_argument("class count must be in [1, 255]");
  if (eval_.size() != n_) throw std::invalid_argument("evaluation mask size does not match class count");
}

ConfusionMatrix ConfusionMatrix::forPalette(const ClassPalette& palette) {
  return ConfusionMatrix(palette.classCount(), palette.evalMask());
}

void ConfusionMatrix::accumulate(ClassId predicted, ClassId gt) {
  if (!isEval(predicted) || !isEval(gt)) {
    throw std::invalid_argument("confusion matrix: class pair (" + std::to_string(predicted) + ", " +
                                std::to_string(gt) + ") outside the evaluation set");
  }
  ++counts_[predicted * n_ + gt];
}

void ConfusionMatrix::accumulateUnlabeled(ClassId gt) {
  if (!isEval(gt)) throw std::invalid_argument("confusion matrix: gt class " + std::to_string(gt) + " not evaluated");
  ++unlabeled_[gt];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.n_ != n_ || other.eval_ != eval_) throw std::invalid_argument("confusion matrix: merge of mismatched matrices");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  for (std::size_t i = 0; i < n_; ++i) unlabeled_[i] += other.unlabeled_[i];
}

std::uint64_t ConfusionMatrix::rowSum(ClassId c) const {
  std::uint64_t s = 0;
  for (std::size_t g = 0; g < n_; ++g) s += counts_[c * n_ + g];
  return s;
}

std::uint64_t ConfusionMatrix::colSum(ClassId c) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < n_; ++p) s += counts_[p * n_ + c];
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t c = 0; c < n_; ++c) s += counts_[c * n_ + c];
  return s;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::optional<double> iou(const ConfusionMatrix& cm, ClassId c, const MetricOptions& opt) {
  const std::uint64_t tp = cm.truePositives(c);
  const std::uint64_t fp = cm.rowSum(c) - tp;
  std::uint64_t fn = cm.colSum(c) - tp;
  if (opt.strict) fn += cm.unlabeled(c);
  const std::uint64_t denom = tp + fp + fn;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(denom);
}

std::optional<double> classAccuracy(const ConfusionMatrix& cm, ClassId c) {
  const std::uint64_t n = cm.rowSum(c);
  if (n == 0) return std::nullopt;
  return static_cast<double>(cm.truePositives(c)) / static_cast<double>(n);
}

std::optional<double> overallAccuracy(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) return std::nullopt;
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

MeanIou meanIou(const ConfusionMatrix& cm, const MetricOptions& opt) {
  MeanIou out;
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < cm.classCount(); ++c) {
    const auto id = static_cast<ClassId>(c);
    if (!cm.isEval(id)) continue;
    if (const auto v = iou(cm, id, opt)) {
      sum += *v;
      ++defined;
    } else {
      out.undefined.push_back(id);
    }
  }
  if (defined > 0) out.value = sum / static_cast<double>(defined);
  return out;
}

namespace {

std::string percent(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *v * 100.0);
  return buf;
}

std::string fraction(const std::optional<double>& v) {
  if (!v) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

std::string row(const std::string& name, const std::string& a, const std::string& b) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-20s %7s %7s\n", name.c_str(), a.c_str(), b.c_str());
  return buf;
}

}  // namespace

std::string formatReport(const ConfusionMatrix& cm, const ClassPalette& palette, const MetricOptions& opt) {
  std::string out = row("class", "IoU", "Acc");
  bool any_undefined = false;
  for (const ClassInfo& info : palette.classes()) {
    if (!cm.isEval(info.id)) continue;
    const auto class_iou = iou(cm, info.id, opt);
    std::string iou_text = percent(class_iou);
    if (!class_iou) {
      iou_text += '*';
      any_undefined = true;
    }
    out += row(info.name, iou_text, percent(classAccuracy(cm, info.id)));
  }
  out += row("mIoU", percent(meanIou(cm, opt).value), "");
  out += row("OA", "", percent(overallAccuracy(cm)));
  if (any_undefined) out += "* undefined (no predictions or ground truth), excluded from mIoU\n";
  return out;
}

std::string formatMetricsFile(const ConfusionMatrix& cm, const MetricOptions& opt) {
  std::ostringstream os;
  for (std::size_t c = 0; c < cm.classCount(); ++c) {
    const auto id = static_cast<ClassId>(c);
    if (!cm.isEval(id)) continue;
    os << c << ' ' << fraction(iou(cm, id, opt)) << ' ' << fraction(classAccuracy(cm, id)) << '\n';
  }
  os << "miou " << fraction(meanIou(cm, opt).value) << '\n';
  os << "oa " << fraction(overallAccuracy(cm)) << '\n';
  return os.str();
}

}  // namespace semap
