#include <cmath>

#include <gtest/gtest.h>

#include "semap/errors.hpp"
#include "semap/photometric.hpp"
#include "semap/synth.hpp"
#include "test_support.hpp"

namespace semap {
namespace {

constexpr int kW = 64;
constexpr int kH = 48;

template <typename Fn>
GrayImage imageFrom(Fn&& fn) {
  GrayImage img(kW, kH);
  for (int y = 0; y < kH; ++y) {
    for (int x = 0; x < kW; ++x) img.at(x, y) = static_cast<float>(fn(x, y));
  }
  return img;
}

double texture(int x, int y) { return 40.0 + 3.0 * x + 0.5 * ((x * 7 + y * 13) % 17); }

SequenceDataset pairDataset(const GrayImage& host, const GrayImage& target) {
  SequenceDataset ds;
  ds.rig.intrinsics = CameraIntrinsics{50.0, 50.0, 32.0, 24.0, kW, kH};
  ds.rig.baseline = 0.5;
  ds.palette = synth::defaultPalette();
  for (int k = 0; k < 2; ++k) {
    Keyframe kf;
    kf.id = k;
    kf.labels_left = LabelMap(kW, kH, 0);
    kf.labels_right = kf.labels_left;
    kf.image_left = k == 0 ? host : target;
    kf.image_right = kf.image_left;
    ds.keyframes.push_back(kf);
  }
  ds.keyframes[0].points.push_back({0, 30.0, 20.0, 0.1});
  ds.keyframes[0].points.push_back({0, 12.0, 30.0, 0.2});
  return ds;
}

TEST(Huber, Cost) {
  EXPECT_EQ(huberCost(3.0, 0.0), 9.0);
  EXPECT_EQ(huberCost(-1.5, 2.0), 2.25);
  EXPECT_EQ(huberCost(5.0, 2.0), 16.0);
  EXPECT_EQ(huberCost(-5.0, 2.0), 16.0);
  for (double r = -10.0; r <= 10.0; r += 0.37) EXPECT_LE(huberCost(r, 1.5), r * r);
}

TEST(Pattern, MustContainCenter) {
  EXPECT_THROW(ResidualPattern({{1, 0}}), std::invalid_argument);
  EXPECT_EQ(ResidualPattern::spread8().size(), 8u);
}

TEST(Temporal, TargetIsHostGivesExactZero) {
  const SequenceDataset ds = pairDataset(imageFrom(texture), imageFrom(texture));
  EXPECT_EQ(pointEnergyTemporal({0, 0}, 0, ds, {}), 0.0);
  EXPECT_EQ(pointEnergyTemporal({0, 0}, 1, ds, {}), 0.0);
}

TEST(Temporal, ConstantOffset) {
  const double b = 7.25;
  const SequenceDataset ds = pairDataset(imageFrom(texture), imageFrom([&](int x, int y) { return texture(x, y) + b; }));
  const PhotometricConfig cfg;
  const auto e = pointEnergyTemporal({0, 0}, 1, ds, cfg);
  ASSERT_TRUE(e);
  const double expected = static_cast<double>(cfg.pattern.size()) * b * b;
  EXPECT_NEAR(*e, expected, 1e-9 * expected);
}

TEST(Temporal, NotVisibleWhenPatternLeavesImage) {
  SequenceDataset ds = pairDataset(imageFrom(texture), imageFrom(texture));
  ds.keyframes[1].pose = Pose(Mat3::Identity(), Vec3(3.0, 0.0, 0.0));  // shifts u by -15 px at depth 10
  EXPECT_TRUE(pointEnergyTemporal({0, 0}, 1, ds, {}));
  ds.keyframes[0].points[0].u = 16.0;
  EXPECT_FALSE(pointEnergyTemporal({0, 0}, 1, ds, {}));
  ds.keyframes[0].points[0].u = 2.0;  // pattern reaches x = 0 in the host
  EXPECT_FALSE(pointEnergyTemporal({0, 0}, 0, ds, {}));
}

TEST(Temporal, MissingImagesIsConfigError) {
  SequenceDataset ds = pairDataset(imageFrom(texture), imageFrom(texture));
  ds.keyframes[1].image_left.reset();
  EXPECT_THROW(pointEnergyTemporal({0, 0}, 1, ds, {}), ConfigError);
  EXPECT_THROW(windowEnergy(ds, {0, 1}, {}), ConfigError);
}

TEST(Stereo, DisparityErrorOnRamp) {
  const double g = 2.5;
  SequenceDataset ds = pairDataset(imageFrom(texture), imageFrom(texture));
  // fx * baseline = 25, so d = 0.4 is a 10 px disparity. The right image is
  // built so that exact disparity gives zero residual.
  const double disparity = 10.0;
  ds.keyframes[0].image_left = imageFrom([&](int x, int) { return 20.0 + g * x; });
  ds.keyframes[0].image_right = imageFrom([&](int x, int) { return 20.0 + g * (x + disparity); });
  ds.keyframes[0].points = {{0, 40.0, 20.0, 0.4}};
  const PhotometricConfig cfg;
  EXPECT_NEAR(*pointEnergyStereo({0, 0}, ds, cfg), 0.0, 1e-9);
  ds.keyframes[0].points[0].inv_depth = 12.0 / 25.0;  // +2 px
  const double expected = static_cast<double>(cfg.pattern.size()) * (2.0 * g) * (2.0 * g);
  EXPECT_NEAR(*pointEnergyStereo({0, 0}, ds, cfg), expected, 1e-9 * expected);
  ds.keyframes[0].points[0].u = 12.0;  // pattern leaves the right image
  EXPECT_FALSE(pointEnergyStereo({0, 0}, ds, cfg));
}

TEST(Window, LambdaAndDegenerateWindows) {
  SequenceDataset ds = pairDataset(imageFrom(texture), imageFrom([](int x, int y) { return texture(x, y) + 1.0; }));
  ds.keyframes[0].image_right = imageFrom([](int x, int y) { return texture(x, y) + 2.0; });
  ds.keyframes[1].points = {{1, 20.0, 20.0, 0.05}};

  PhotometricConfig cfg;
  cfg.lambda = 0.0;
  const WindowEnergy temporal_only = windowEnergy(ds, {0, 1}, cfg);
  double expected = 0.0;
  for (std::size_t i = 0; i < 2; ++i) expected += *pointEnergyTemporal({0, i}, 1, ds, cfg);
  expected += *pointEnergyTemporal({1, 0}, 0, ds, cfg);
  EXPECT_DOUBLE_EQ(temporal_only.total, expected);
  EXPECT_EQ(temporal_only.stereo, 0.0);

  cfg.lambda = 1.0;
  const WindowEnergy single = windowEnergy(ds, {0}, cfg);
  const double stereo = *pointEnergyStereo({0, 0}, ds, cfg) + *pointEnergyStereo({0, 1}, ds, cfg);
  EXPECT_DOUBLE_EQ(single.total, stereo);
  EXPECT_EQ(single.residual_count, 16u);

  cfg.lambda = 0.5;
  const WindowEnergy both = windowEnergy(ds, {0, 1}, cfg);
  EXPECT_DOUBLE_EQ(both.total, both.temporal + 0.5 * both.stereo);
  EXPECT_DOUBLE_EQ(both.per_frame[0] + both.per_frame[1], both.total);
  EXPECT_EQ(windowEnergy(ds, {0, 1}, cfg, 4).total, both.total);
}

TEST(Window, HuberNeverExceedsSquares) {
  SequenceDataset ds = pairDataset(imageFrom(texture), imageFrom([](int x, int y) { return texture(x, y) * 1.3; }));
  PhotometricConfig squared;
  PhotometricConfig robust;
  robust.huber_delta = 9.0;
  const double e2 = windowEnergy(ds, {0, 1}, squared).total;
  EXPECT_LE(windowEnergy(ds, {0, 1}, robust).total, e2);
  robust.huber_delta = 1e6;
  EXPECT_EQ(windowEnergy(ds, {0, 1}, robust).total, e2);
}

class PlaneScene : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    synth::SceneSetup setup = synth::makePreset(synth::ScenePreset::kPlane, 5);
    setup.rig.intrinsics = CameraIntrinsics{100.0, 100.0, 80.0, 60.0, 160, 120};
    synth::GeneratorOptions opt;
    opt.points_per_kf = 60;
    opt.render_images = true;
    opt.render_right_images = true;
    opt.seed = 2;
    ds_ = new SequenceDataset(synth::generate(setup.scene, setup.trajectory, setup.rig, setup.palette, opt).dataset);
  }
  static void TearDownTestSuite() { delete ds_; }
  static SequenceDataset* ds_;
};

SequenceDataset* PlaneScene::ds_ = nullptr;

TEST_F(PlaneScene, NoiseFreeWindowIsNearZero) {
  const WindowEnergy e = windowEnergy(*ds_, {0, 1, 2, 3, 4}, {});
  ASSERT_GT(e.residual_count, 0u);
  EXPECT_LE(e.total, 1e-6 * static_cast<double>(e.residual_count));
}

TEST_F(PlaneScene, PosePerturbationIncreasesEnergy) {
  const double base = windowEnergy(*ds_, {0, 1, 2, 3, 4}, {}).total;
  for (double eps : {1e-3, 1e-2, 1e-1}) {
    for (int axis = 0; axis < 6; ++axis) {
      SequenceDataset moved = *ds_;
      Keyframe& kf = moved.keyframes[2];
      Vec3 delta = Vec3::Zero();
      delta[axis % 3] = eps;
      kf.pose = axis < 3 ? Pose(kf.pose.rotation(), kf.pose.translation() + delta)
                         : Pose(kf.pose.rotation() * rotationFromAxisAngle(delta), kf.pose.translation());
      EXPECT_GT(windowEnergy(moved, {0, 1, 2, 3, 4}, {}).total, base) << eps << ' ' << axis;
    }
  }
}

}  // namespace
}  // namespace semap
