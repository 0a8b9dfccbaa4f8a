#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "semap/covisibility.hpp"
#include "semap/dataset.hpp"

namespace semap {

struct PatternOffset {
  int dx = 0;
  int dy = 0;
};

// Pixel offsets forming one point's residual block. Must contain (0, 0).
class ResidualPattern {
 public:
  explicit ResidualPattern(std::vector<PatternOffset> offsets);

  // Eight-pixel spread pattern used by sparse direct odometry.
  static ResidualPattern spread8();

  std::size_t size() const { return offsets_.size(); }
  const std::vector<PatternOffset>& offsets() const { return offsets_; }

 private:
  std::vector<PatternOffset> offsets_;
};

struct PhotometricConfig {
  double lambda = 1.0;       // weight of the stereo term
  double huber_delta = 0.0;  // intensity units; 0 = plain squares
  ResidualPattern pattern = ResidualPattern::spread8();
  ProjectionConfig projection;

  void validate() const;
};

// Huber cost of one residual; r^2 when delta == 0 or |r| <= delta.
double huberCost(double residual, double delta);

// Sum over the pattern of the cost between the host left image and the
// target keyframe's left image. std::nullopt means NotVisible (any pattern
// pixel outside the interpolatable interior or behind the near plane).
// Throws ConfigError when either image is missing.
std::optional<double> pointEnergyTemporal(const PointRef& point, std::size_t target_kf, const SequenceDataset& ds,
                                          const PhotometricConfig& cfg);

// Same residual against the host keyframe's rectified right image.
std::optional<double> pointEnergyStereo(const PointRef& point, const SequenceDataset& ds,
                                        const PhotometricConfig& cfg);

struct WindowEnergy {
  double total = 0.0;
  double temporal = 0.0;
  double stereo = 0.0;  // before the lambda factor
  std::vector<double> per_frame;  // contribution of points hosted in each window frame
  std::size_t residual_count = 0;  // pattern residuals that entered the sum
};

// Photometric energy of the window (keyframe indices). For every point hosted
// in the window: temporal terms against all other window frames plus lambda
// times the stereo term; NotVisible terms add 0. The stereo term is skipped
// when lambda == 0. Summation runs sequentially in point order so the total
// is bit-stable for any thread count.
WindowEnergy windowEnergy(const SequenceDataset& ds, const std::vector<std::size_t>& window,
                          const PhotometricConfig& cfg, unsigned threads = 1);

}  // namespace semap
