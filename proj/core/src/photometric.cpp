#include "semap/photometric.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "semap/errors.hpp"
#include "semap/parallel.hpp"

namespace semap {

ResidualPattern::ResidualPattern(std::vector<PatternOffset> offsets) : offsets_(std::move(offsets)) {
  bool has_center = false;
  for (const PatternOffset& o : offsets_) has_center = has_center || (o.dx == 0 && o.dy == 0);
  if (!has_center) throw std::invalid_argument("residual pattern must contain (0, 0)");
}

ResidualPattern ResidualPattern::spread8() {
  return ResidualPattern({{0, -2}, {-1, -1}, {1, -1}, {-2, 0}, {0, 0}, {2, 0}, {-1, 1}, {0, 2}});
}

void PhotometricConfig::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("lambda must be finite and >= 0");
  if (!std::isfinite(huber_delta) || huber_delta < 0.0) {
    throw std::invalid_argument("huber_delta must be finite and >= 0");
  }
}

double huberCost(double residual, double delta) {
  const double a = std::abs(residual);
  if (delta == 0.0 || a <= delta) return residual * residual;
  return 2.0 * delta * a - delta * delta;
}

namespace {

const GrayImage& requireImage(const std::optional<GrayImage>& image, const Keyframe& kf, const char* side) {
  if (!image) {
    throw ConfigError("keyframe " + std::to_string(kf.id) + " has no " + side + " grayscale image");
  }
  return *image;
}

bool samePose(const Pose& a, const Pose& b) {
  return a.rotation() == b.rotation() && a.translation() == b.translation();
}

}  // namespace

std::optional<double> pointEnergyTemporal(const PointRef& ref, std::size_t target_kf, const SequenceDataset& ds,
                                          const PhotometricConfig& cfg) {
  const Keyframe& host = ds.keyframes.at(ref.keyframe);
  const Keyframe& target = ds.keyframes.at(target_kf);
  const GrayImage& host_img = requireImage(host.image_left, host, "left");
  const GrayImage& target_img = requireImage(target.image_left, target, "left");
  const SparsePoint& point = host.points.at(ref.index);
  const CameraIntrinsics& intr = ds.rig.intrinsics;
  // Coincident frames map every pixel onto itself; skipping the round trip keeps that exact.
  const bool identity = target_kf == ref.keyframe || samePose(host.pose, target.pose);

  double energy = 0.0;
  for (const PatternOffset& o : cfg.pattern.offsets()) {
    const Pixel h{point.u + o.dx, point.v + o.dy};
    if (!host_img.interpolatable(h.u, h.v)) return std::nullopt;
    Pixel t = h;
    if (!identity) {
      const Vec3 p = transform(host.pose, target.pose, unproject(h, point.inv_depth, intr));
      if (!(p.z() > cfg.projection.z_min)) return std::nullopt;
      t = Pixel{intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy};
    }
    if (!target_img.interpolatable(t.u, t.v)) return std::nullopt;
    energy += huberCost(target_img.bilinear(t.u, t.v) - host_img.bilinear(h.u, h.v), cfg.huber_delta);
  }
  return energy;
}

std::optional<double> pointEnergyStereo(const PointRef& ref, const SequenceDataset& ds, const PhotometricConfig& cfg) {
  const Keyframe& host = ds.keyframes.at(ref.keyframe);
  const GrayImage& left = requireImage(host.image_left, host, "left");
  const GrayImage& right = requireImage(host.image_right, host, "right");
  const SparsePoint& point = host.points.at(ref.index);
  const double disparity = ds.rig.disparity(point.inv_depth);

  double energy = 0.0;
  for (const PatternOffset& o : cfg.pattern.offsets()) {
    const Pixel h{point.u + o.dx, point.v + o.dy};
    if (!left.interpolatable(h.u, h.v)) return std::nullopt;
    const Pixel r{h.u - disparity, h.v};
    if (!right.interpolatable(r.u, r.v)) return std::nullopt;
    energy += huberCost(right.bilinear(r.u, r.v) - left.bilinear(h.u, h.v), cfg.huber_delta);
  }
  return energy;
}

WindowEnergy windowEnergy(const SequenceDataset& ds, const std::vector<std::size_t>& window,
                          const PhotometricConfig& cfg, unsigned threads) {
  cfg.validate();
  for (std::size_t k : window) {
    if (k >= ds.keyframes.size()) throw std::invalid_argument("window frame index out of range");
  }

  struct Term {
    double temporal = 0.0;
    double stereo = 0.0;
    std::size_t residuals = 0;
  };
  std::vector<PointRef> refs;
  std::vector<std::size_t> owner;  // window slot of each point's host
  for (std::size_t w = 0; w < window.size(); ++w) {
    for (std::size_t i = 0; i < ds.keyframes[window[w]].points.size(); ++i) {
      refs.push_back({window[w], i});
      owner.push_back(w);
    }
  }
  std::vector<Term> terms(refs.size());
  const std::size_t pattern_size = cfg.pattern.size();
  parallelFor(refs.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      Term& term = terms[n];
      for (std::size_t j : window) {
        if (j == refs[n].keyframe) continue;
        if (const auto e = pointEnergyTemporal(refs[n], j, ds, cfg)) {
          term.temporal += *e;
          term.residuals += pattern_size;
        }
      }
      if (cfg.lambda != 0.0) {
        if (const auto e = pointEnergyStereo(refs[n], ds, cfg)) {
          term.stereo = *e;
          term.residuals += pattern_size;
        }
      }
    }
  });

  WindowEnergy out;
  out.per_frame.assign(window.size(), 0.0);
  for (std::size_t n = 0; n < terms.size(); ++n) {
    const double point_total = terms[n].temporal + cfg.lambda * terms[n].stereo;
    out.temporal += terms[n].temporal;
    out.stereo += terms[n].stereo;
    out.total += point_total;
    out.per_frame[owner[n]] += point_total;
    out.residual_count += terms[n].residuals;
  }
  return out;
}

}  // namespace semap
