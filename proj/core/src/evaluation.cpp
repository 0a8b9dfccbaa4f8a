#include "semap/evaluation.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "semap/errors.hpp"

namespace semap {

std::string formatLabels(const SequenceDataset& ds, const LabelAssignment& labels) {
  if (labels.labels.size() != ds.keyframes.size()) throw std::invalid_argument("labels do not match dataset");
  std::ostringstream os;
  for (std::size_t k = 0; k < ds.keyframes.size(); ++k) {
    for (std::size_t i = 0; i < labels.labels[k].size(); ++i) {
      const PointLabel& l = labels.labels[k][i];
      os << ds.keyframes[k].id << ' ' << i << ' ' << (l ? static_cast<int>(*l) : -1) << '\n';
    }
  }
  return os.str();
}

std::string formatGroundTruth(const SequenceDataset& ds, const GroundTruthAssignment& gt) {
  if (gt.points.size() != ds.keyframes.size()) throw std::invalid_argument("ground truth does not match dataset");
  std::ostringstream os;
  for (std::size_t k = 0; k < ds.keyframes.size(); ++k) {
    for (std::size_t i = 0; i < gt.points[k].size(); ++i) {
      const GroundTruth& g = gt.points[k][i];
      os << ds.keyframes[k].id << ' ' << i << ' ' << (g.label ? static_cast<int>(*g.label) : -1) << ' '
         << toString(g.reason) << '\n';
    }
  }
  return os.str();
}

namespace {

template <typename Fn>
void forEachRecord(const std::filesystem::path& path, std::size_t fields, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string name = path.filename().string();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    const std::string where = name + ":" + std::to_string(line_no) + ": ";
    if (tok.size() != fields) {
      throw FormatError(where + "expected " + std::to_string(fields) + " fields, got " + std::to_string(tok.size()));
    }
    try {
      std::size_t pos = 0;
      const int kf = std::stoi(tok[0], &pos);
      if (pos != tok[0].size()) throw std::invalid_argument("kf");
      const long long idx = std::stoll(tok[1], &pos);
      if (pos != tok[1].size() || idx < 0) throw std::invalid_argument("index");
      const int label = std::stoi(tok[2], &pos);
      if (pos != tok[2].size() || label < -1 || label > 254) throw std::invalid_argument("label");
      const PointLabel l = label < 0 ? PointLabel{} : PointLabel{static_cast<ClassId>(label)};
      fn(PointKey{kf, static_cast<std::size_t>(idx)}, l, tok, where);
    } catch (const std::logic_error&) {
      throw FormatError(where + "malformed record '" + line + "'");
    }
  }
}

}  // namespace

LabelTable readLabels(const std::filesystem::path& path) {
  LabelTable table;
  forEachRecord(path, 3, [&](const PointKey& key, const PointLabel& l, const auto&, const std::string& where) {
    if (!table.emplace(key, l).second) throw FormatError(where + "duplicate point");
  });
  return table;
}

GroundTruthTable readGroundTruth(const std::filesystem::path& path) {
  GroundTruthTable table;
  forEachRecord(path, 4, [&](const PointKey& key, const PointLabel& l, const std::vector<std::string>& tok,
                             const std::string& where) {
    const auto reason = exclusionReasonFromString(tok[3]);
    if (!reason) throw FormatError(where + "unknown reason '" + tok[3] + "'");
    if ((*reason == ExclusionReason::kNone) != l.has_value()) {
      throw FormatError(where + "label and reason disagree");
    }
    if (!table.emplace(key, GroundTruth{l, *reason}).second) throw FormatError(where + "duplicate point");
  });
  return table;
}

void accumulatePoint(ConfusionMatrix& cm, const PointLabel& predicted, const GroundTruth& gt) {
  if (!gt.label || !cm.isEval(*gt.label)) return;
  if (predicted && cm.isEval(*predicted)) {
    cm.accumulate(*predicted, *gt.label);
  } else {
    cm.accumulateUnlabeled(*gt.label);
  }
}

ConfusionMatrix evaluate(const LabelTable& predicted, const GroundTruthTable& gt, const ClassPalette& palette) {
  ConfusionMatrix cm = ConfusionMatrix::forPalette(palette);
  for (const auto& [key, truth] : gt) {
    if (!truth.label) continue;
    const auto it = predicted.find(key);
    if (it == predicted.end()) {
      throw FormatError("no prediction for keyframe " + std::to_string(key.first) + " point " +
                        std::to_string(key.second));
    }
    if (*truth.label >= palette.classCount()) {
      throw FormatError("ground-truth class " + std::to_string(*truth.label) + " not in palette");
    }
    accumulatePoint(cm, it->second, truth);
  }
  return cm;
}

ConfusionMatrix evaluate(const LabelAssignment& predicted, const GroundTruthAssignment& gt,
                         const ClassPalette& palette) {
  if (predicted.labels.size() != gt.points.size()) throw std::invalid_argument("assignments differ in size");
  ConfusionMatrix cm = ConfusionMatrix::forPalette(palette);
  for (std::size_t k = 0; k < gt.points.size(); ++k) {
    if (predicted.labels[k].size() != gt.points[k].size()) throw std::invalid_argument("assignments differ in size");
    for (std::size_t i = 0; i < gt.points[k].size(); ++i) accumulatePoint(cm, predicted.labels[k][i], gt.points[k][i]);
  }
  return cm;
}

}  // namespace semap
