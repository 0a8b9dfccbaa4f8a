#include <gtest/gtest.h>

#include "semap/covisibility.hpp"
#include "semap/errors.hpp"
#include "test_support.hpp"

namespace semap {
namespace {

// Keyframes at z = 0, step, 2*step, ... with uniform label maps.
SequenceDataset straightLine(std::size_t n, double step, ClassId left = 2, ClassId right = 2, bool with_right = true) {
  SequenceDataset ds;
  ds.rig = testing::testRig();
  ds.palette = synth::defaultPalette();
  const CameraIntrinsics& intr = ds.rig.intrinsics;
  for (std::size_t k = 0; k < n; ++k) {
    Keyframe kf;
    kf.id = static_cast<int>(k);
    kf.pose = Pose(Mat3::Identity(), Vec3(0.0, 0.0, step * static_cast<double>(k)));
    kf.labels_left = LabelMap(intr.width, intr.height, left);
    if (with_right) kf.labels_right = LabelMap(intr.width, intr.height, right);
    ds.keyframes.push_back(std::move(kf));
  }
  return ds;
}

TEST(Covisibility, ZeroWindowMonoIsHostOnly) {
  SequenceDataset ds = straightLine(5, 0.0);
  ds.keyframes[2].points.push_back({2, 320.0, 240.0, 0.1});
  const CoVisibleSet set = covisibleSet({2, 0}, ds, {0, StereoMode::kMono, {}});
  ASSERT_EQ(set.observations.size(), 1u);
  EXPECT_EQ(set.observations[0].frame, 2u);
  EXPECT_EQ(set.observations[0].side, Side::kLeft);
  EXPECT_EQ(set.observations[0].label, 2);
  EXPECT_DOUBLE_EQ(set.observations[0].inv_depth_local, 0.1);
}

TEST(Covisibility, VoidHostGivesEmptySet) {
  SequenceDataset ds = straightLine(1, 0.0, kVoidClass);
  ds.keyframes[0].points.push_back({0, 320.0, 240.0, 0.1});
  EXPECT_TRUE(covisibleSet({0, 0}, ds, {0, StereoMode::kMono, {}}).observations.empty());
}

TEST(Covisibility, StaticWindowCountsBothSides) {
  SequenceDataset ds = straightLine(4, 0.0);
  ds.keyframes[0].points.push_back({0, 320.0, 240.0, 0.1});
  const CoVisibleSet set = covisibleSet({0, 0}, ds, {3, StereoMode::kStereo, {}});
  ASSERT_EQ(set.observations.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(set.observations[i].frame, i / 2);
    EXPECT_EQ(set.observations[i].side, i % 2 == 0 ? Side::kLeft : Side::kRight);
  }
  EXPECT_DOUBLE_EQ(set.observations[1].pixel.u, 295.0);
}

TEST(Covisibility, WindowIsSymmetricAndClipped) {
  SequenceDataset ds = straightLine(10, 0.0);
  ds.keyframes[5].points.push_back({5, 320.0, 240.0, 0.1});
  const CoVisibleSet set = covisibleSet({5, 0}, ds, {2, StereoMode::kMono, {}});
  ASSERT_EQ(set.observations.size(), 5u);
  EXPECT_EQ(set.observations.front().frame, 3u);
  EXPECT_EQ(set.observations.back().frame, 7u);
}

TEST(Covisibility, PassedPointContributesNothing) {
  // Point 3 m ahead of keyframe 0; keyframes 1 m apart, so frames >= 3 are past it.
  SequenceDataset ds = straightLine(6, 1.0);
  ds.keyframes[0].points.push_back({0, 320.0, 240.0, 1.0 / 3.0});
  const CoVisibleSet set = covisibleSet({0, 0}, ds, {5, StereoMode::kMono, {}});
  ASSERT_EQ(set.observations.size(), 3u);
  EXPECT_NEAR(set.observations[2].inv_depth_local, 1.0, 1e-12);
}

TEST(Covisibility, VoidObservationsDropped) {
  SequenceDataset ds = straightLine(3, 0.0);
  ds.keyframes[1].labels_left = LabelMap(640, 480, kVoidClass);
  ds.keyframes[0].points.push_back({0, 320.0, 240.0, 0.1});
  const CoVisibleSet set = covisibleSet({0, 0}, ds, {2, StereoMode::kStereo, {}});
  EXPECT_EQ(set.observations.size(), 5u);
}

TEST(Covisibility, StereoNeedsRightLabels) {
  SequenceDataset ds = straightLine(2, 0.0, 2, 2, false);
  ds.keyframes[0].points.push_back({0, 320.0, 240.0, 0.1});
  EXPECT_THROW(covisibleSet({0, 0}, ds, {1, StereoMode::kStereo, {}}), ConfigError);
  EXPECT_EQ(covisibleSet({0, 0}, ds, {1, StereoMode::kMono, {}}).observations.size(), 2u);
}

TEST(Covisibility, BadArguments) {
  SequenceDataset ds = straightLine(2, 0.0);
  ds.keyframes[0].points.push_back({0, 320.0, 240.0, 0.1});
  EXPECT_THROW(covisibleSet({0, 0}, ds, {-1, StereoMode::kMono, {}}), std::invalid_argument);
  EXPECT_THROW(covisibleSet({0, 1}, ds, {1, StereoMode::kMono, {}}), std::invalid_argument);
  EXPECT_THROW(covisibleSet({2, 0}, ds, {1, StereoMode::kMono, {}}), std::invalid_argument);
}

class CovisibilityOnSynth : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { seq_ = new synth::GeneratedSequence(testing::smallStreet(8, 60, 3)); }
  static void TearDownTestSuite() {
    delete seq_;
    seq_ = nullptr;
  }
  static synth::GeneratedSequence* seq_;
};

synth::GeneratedSequence* CovisibilityOnSynth::seq_ = nullptr;

TEST_F(CovisibilityOnSynth, LocalInverseDepthMatchesGeometry) {
  const SequenceDataset& ds = seq_->dataset;
  for (std::size_t k = 0; k < ds.keyframes.size(); ++k) {
    for (std::size_t i = 0; i < ds.keyframes[k].points.size(); ++i) {
      const SparsePoint& p = ds.keyframes[k].points[i];
      const Vec3 host = unproject(p.pixel(), p.inv_depth, ds.rig.intrinsics);
      for (const Observation& o : covisibleSet({k, i}, ds, {3, StereoMode::kStereo, {}}).observations) {
        const Vec3 local = transform(ds.keyframes[k].pose, ds.keyframes[o.frame].pose, host);
        EXPECT_NEAR(o.inv_depth_local, 1.0 / local.z(), 1e-9);
      }
    }
  }
}

TEST_F(CovisibilityOnSynth, NoiseFreeObservationsCarryTrueClass) {
  const SequenceDataset& ds = seq_->dataset;
  for (std::size_t k = 0; k < ds.keyframes.size(); ++k) {
    for (std::size_t i = 0; i < ds.keyframes[k].points.size(); ++i) {
      for (const Observation& o : covisibleSet({k, i}, ds, {7, StereoMode::kStereo, {}}).observations) {
        EXPECT_EQ(o.label, seq_->true_labels[k][i]);
      }
    }
  }
}

TEST_F(CovisibilityOnSynth, MonoIsSubsetOfStereo) {
  const SequenceDataset& ds = seq_->dataset;
  for (std::size_t k = 0; k < ds.keyframes.size(); ++k) {
    for (std::size_t i = 0; i < ds.keyframes[k].points.size(); ++i) {
      const auto mono = covisibleSet({k, i}, ds, {4, StereoMode::kMono, {}}).observations;
      const auto stereo = covisibleSet({k, i}, ds, {4, StereoMode::kStereo, {}}).observations;
      std::size_t s = 0;
      for (const Observation& m : mono) {
        while (s < stereo.size() && !(stereo[s].frame == m.frame && stereo[s].side == m.side)) ++s;
        ASSERT_LT(s, stereo.size());
        EXPECT_EQ(stereo[s].pixel.u, m.pixel.u);
        EXPECT_EQ(stereo[s].label, m.label);
      }
    }
  }
}

}  // namespace
}  // namespace semap
