#include "semap/tcl.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "semap/errors.hpp"
#include "semap/parallel.hpp"

namespace semap {

double VoteSet::total() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

void VoteSet::add(ClassId c, double weight) {
  if (c >= weights_.size()) {
    throw std::out_of_range("vote for class " + std::to_string(c) + " with only " + std::to_string(weights_.size()) +
                            " classes");
  }
  weights_[c] += weight;
}

void TclConfig::validate() const {
  if (!std::isfinite(dist_min) || dist_min < 0.0) {
    throw std::invalid_argument("dist_min must be finite and >= 0, got " + std::to_string(dist_min));
  }
  if (window < 0) throw std::invalid_argument("window must be >= 0, got " + std::to_string(window));
}

VoteSet accumulateVotes(const CoVisibleSet& set, std::size_t class_count, const TclConfig& cfg) {
  VoteSet votes(class_count);
  for (const Observation& obs : set.observations) {
    if (cfg.accepts(obs.inv_depth_local)) votes.add(obs.label, obs.inv_depth_local);
  }
  return votes;
}

PointLabel assignLabel(const VoteSet& votes, PointLabel host_label, const TclConfig& cfg) {
  const std::vector<double>& w = votes.weights();
  std::size_t best = 0;
  for (std::size_t c = 1; c < w.size(); ++c) {
    if (w[c] > w[best]) best = c;
  }
  if (w.empty() || !(w[best] > 0.0)) return std::nullopt;
  if (cfg.tie_break == TieBreak::kHostThenLowestId && host_label && *host_label < w.size() &&
      w[*host_label] == w[best]) {
    return host_label;
  }
  return static_cast<ClassId>(best);
}

namespace {

PointLabel hostLabel(const PointRef& ref, const SequenceDataset& ds) {
  const Keyframe& kf = ds.keyframes.at(ref.keyframe);
  if (kf.labels_left.empty()) throw ConfigError("keyframe " + std::to_string(kf.id) + " has no left label map");
  const ClassId id = sampleLabel(kf.labels_left, kf.points.at(ref.index).pixel());
  if (id == kVoidClass) return std::nullopt;
  return id;
}

template <typename Fn>
LabelAssignment forEachPoint(const SequenceDataset& ds, unsigned threads, Fn&& fn) {
  std::vector<PointRef> refs;
  refs.reserve(ds.pointCount());
  LabelAssignment out;
  out.labels.resize(ds.keyframes.size());
  for (std::size_t k = 0; k < ds.keyframes.size(); ++k) {
    out.labels[k].resize(ds.keyframes[k].points.size());
    for (std::size_t i = 0; i < ds.keyframes[k].points.size(); ++i) refs.push_back({k, i});
  }
  parallelFor(refs.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      out.labels[refs[n].keyframe][refs[n].index] = fn(refs[n]);
    }
  });
  return out;
}

}  // namespace

PointLabel baselineLabel(const PointRef& point, const SequenceDataset& ds) { return hostLabel(point, ds); }

std::size_t LabelAssignment::size() const {
  std::size_t n = 0;
  for (const auto& kf : labels) n += kf.size();
  return n;
}

LabelAssignment labelAllPoints(const SequenceDataset& ds, const TclConfig& cfg, unsigned threads) {
  cfg.validate();
  if (cfg.mode == StereoMode::kStereo && !ds.hasRightLabels()) {
    throw ConfigError("stereo mode requires right label maps (labels/right/) for every keyframe");
  }
  const std::size_t class_count = ds.palette.classCount();
  const CovisibilityConfig cov = cfg.covisibility();
  return forEachPoint(ds, threads, [&](const PointRef& ref) {
    const VoteSet votes = accumulateVotes(covisibleSet(ref, ds, cov), class_count, cfg);
    return assignLabel(votes, hostLabel(ref, ds), cfg);
  });
}

LabelAssignment baselineLabels(const SequenceDataset& ds) {
  return forEachPoint(ds, 1, [&](const PointRef& ref) { return hostLabel(ref, ds); });
}

}  // namespace semap
