#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "semap/dataset.hpp"
#include "semap/errors.hpp"
#include "semap/image.hpp"
#include "test_support.hpp"

namespace semap {
namespace {

using testing::TempDir;
using testing::writeText;

TEST(SampleLabel, RoundsToNearestCell) {
  LabelMap map(40, 30, 0);
  map.at(10, 21) = 4;
  map.at(10, 20) = 3;
  EXPECT_EQ(sampleLabel(map, {10.0, 21.0}), 4);
  EXPECT_EQ(sampleLabel(map, {10.4, 20.6}), 4);
  EXPECT_EQ(sampleLabel(map, {9.6, 20.4}), 3);
}

TEST(SampleLabel, UniformMap) {
  const LabelMap map(16, 9, 7);
  for (double u : {0.0, 3.3, 15.4}) {
    for (double v : {0.0, 4.5, 8.49}) EXPECT_EQ(sampleLabel(map, {u, v}), 7);
  }
}

TEST(SampleLabel, OutsideThrows) {
  const LabelMap map(16, 9, 1);
  EXPECT_THROW(sampleLabel(map, {-0.6, 1.0}), std::domain_error);
  EXPECT_THROW(sampleLabel(map, {15.5, 1.0}), std::domain_error);
  EXPECT_NO_THROW(sampleLabel(map, {15.49, 8.49}));
}

TEST(GrayImage, BilinearAndInterior) {
  GrayImage img(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) img.at(x, y) = static_cast<float>(10 * x + y);
  }
  EXPECT_TRUE(img.interpolatable(1.0, 2.0));
  EXPECT_FALSE(img.interpolatable(0.99, 2.0));
  EXPECT_FALSE(img.interpolatable(2.01, 2.0));
  EXPECT_DOUBLE_EQ(img.bilinear(1.5, 1.25), 16.25);
  EXPECT_DOUBLE_EQ(img.bilinear(2.0, 2.0), 22.0);
}

TEST(Png, LabelAndGrayRoundTrip) {
  TempDir dir;
  LabelMap map(13, 7);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 13; ++x) map.at(x, y) = static_cast<ClassId>((x * 7 + y) % 11);
  }
  map.at(3, 3) = kVoidClass;
  writeLabelPng(dir / "l.png", map);
  EXPECT_EQ(readLabelPng(dir / "l.png"), map);

  GrayImage img(5, 3);
  for (std::size_t i = 0; i < img.data().size(); ++i) img.data()[i] = static_cast<float>(i * 17);
  writeGrayPng(dir / "g.png", img);
  EXPECT_EQ(readGrayPng(dir / "g.png"), img);
}

TEST(Png, MissingAndCorrupt) {
  TempDir dir;
  EXPECT_THROW(readLabelPng(dir / "missing.png"), IoError);
  writeText(dir / "bad.png", "not a png");
  EXPECT_THROW(readLabelPng(dir / "bad.png"), FormatError);
}

TEST(Palette, Invariants) {
  EXPECT_THROW(ClassPalette({{1, "a", {0, 0, 0}, true}}), std::invalid_argument);
  EXPECT_THROW(ClassPalette({{0, "a", {0, 0, 0}, true}, {1, "a", {0, 0, 0}, true}}), std::invalid_argument);
  EXPECT_THROW(ClassPalette({{0, "a", {0, 0, 0}, true}, {kVoidClass, "void", {0, 0, 0}, true}}),
               std::invalid_argument);
  const ClassPalette p({{0, "road", {1, 2, 3}, true}, {1, "sky", {4, 5, 6}, false}, {kVoidClass, "void", {}, false}});
  EXPECT_EQ(p.classCount(), 2u);
  EXPECT_EQ(p.findByName("sky"), ClassId{1});
  EXPECT_FALSE(p.findByName("car"));
  EXPECT_FALSE(p.isEvalIncluded(1));
  EXPECT_TRUE(p.voidEntry());
}

TEST(Sequence, SynthRoundTrip) {
  TempDir dir;
  const synth::GeneratedSequence seq = testing::smallStreet(4, 50, 11, true, 500);
  saveSequence(seq.dataset, dir.path());
  const SequenceDataset back = loadSequence(dir.path());
  const SequenceDataset& ds = seq.dataset;

  EXPECT_EQ(back.rig.intrinsics.width, ds.rig.intrinsics.width);
  EXPECT_DOUBLE_EQ(back.rig.intrinsics.fx, ds.rig.intrinsics.fx);
  EXPECT_DOUBLE_EQ(back.rig.baseline, ds.rig.baseline);
  EXPECT_EQ(back.palette, ds.palette);
  ASSERT_EQ(back.keyframes.size(), ds.keyframes.size());
  for (std::size_t k = 0; k < ds.keyframes.size(); ++k) {
    const Keyframe& a = ds.keyframes[k];
    const Keyframe& b = back.keyframes[k];
    EXPECT_EQ(a.id, b.id);
    EXPECT_LT((a.pose.rotation() - b.pose.rotation()).norm(), 1e-9);
    EXPECT_LT((a.pose.translation() - b.pose.translation()).norm(), 1e-9);
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(a.labels_left, b.labels_left);
    EXPECT_EQ(a.labels_right, b.labels_right);
    EXPECT_EQ(a.gt2d, b.gt2d);
    EXPECT_EQ(a.lidar, b.lidar);
    ASSERT_TRUE(b.image_left && b.image_right);
    for (std::size_t i = 0; i < a.image_left->data().size(); ++i) {
      ASSERT_NEAR(a.image_left->data()[i], b.image_left->data()[i], 0.5);
    }
  }
}

TEST(Sequence, PointsSampleNonVoidHostLabels) {
  const synth::GeneratedSequence seq = testing::smallStreet(3, 80, 5);
  for (const Keyframe& kf : seq.dataset.keyframes) {
    for (const SparsePoint& p : kf.points) EXPECT_NE(sampleLabel(kf.labels_left, p.pixel()), kVoidClass);
  }
}

class MinimalSequence : public ::testing::Test {
 protected:
  void SetUp() override {
    writeText(dir_ / "calib.txt", "500 500 320 240 640 480 0.5\n");
    writeText(dir_ / "palette.txt", "0 road 128 64 128 1\n1 car 0 0 142 1\n");
    writeText(dir_ / "poses.txt",
              "0 1 0 0 0 0 1 0 0 0 0 1 0\n"
              "1 1 0 0 0 0 1 0 0 0 0 1 1\n");
  }
  TempDir dir_;
};

TEST_F(MinimalSequence, LoadsWithoutOptionalFiles) {
  const SequenceDataset ds = loadSequence(dir_.path());
  EXPECT_EQ(ds.keyframes.size(), 2u);
  EXPECT_EQ(ds.pointCount(), 0u);
  EXPECT_FALSE(ds.hasRightLabels());
  EXPECT_DOUBLE_EQ(ds.keyframes[1].pose.translation().z(), 1.0);
}

TEST_F(MinimalSequence, ShortPoseLineNamesFileAndLine) {
  writeText(dir_ / "poses.txt",
            "0 1 0 0 0 0 1 0 0 0 0 1 0\n"
            "1 1 0 0 0 0 1 0 0 0 0 1\n");
  try {
    loadSequence(dir_.path());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("poses.txt:2: expected 13 fields", 0), 0u) << e.what();
  }
}

TEST_F(MinimalSequence, NonOrthonormalRotationRejected) {
  writeText(dir_ / "poses.txt", "0 1 0 0 0 0 2 0 0 0 0 1 0\n");
  EXPECT_THROW(loadSequence(dir_.path()), FormatError);
}

TEST_F(MinimalSequence, RoundedRotationIsRepaired) {
  writeText(dir_ / "poses.txt", "0 0.999999 0.001 0 0 -0.001 0.999999 0 0 0 0 1 0\n");
  const SequenceDataset ds = loadSequence(dir_.path());
  EXPECT_TRUE(ds.keyframes[0].pose.isValid(1e-12));
}

TEST_F(MinimalSequence, PointsWithoutLabelMapRejected) {
  writeText(dir_ / "points" / "0.txt", "10 10 0.5\n");
  EXPECT_THROW(loadSequence(dir_.path()), FormatError);
}

TEST_F(MinimalSequence, LabelIdOutsidePaletteRejected) {
  writeText(dir_ / "points" / "0.txt", "10 10 0.5\n");
  std::filesystem::create_directories(dir_ / "labels/left");
  writeLabelPng(dir_ / "labels/left/0.png", LabelMap(640, 480, 5));
  EXPECT_THROW(loadSequence(dir_.path()), FormatError);
}

TEST_F(MinimalSequence, MissingRequiredFile) {
  std::filesystem::remove(dir_ / "calib.txt");
  EXPECT_THROW(loadSequence(dir_.path()), FormatError);
  EXPECT_THROW(loadSequence(dir_ / "nope"), IoError);
}

TEST(LidarBin, RoundTripAndTruncation) {
  TempDir dir;
  LidarScan scan;
  scan.points = {{1.0f, 2.0f, 3.0f, 4}, {-1.5f, 0.25f, 99.0f, 255}};
  writeLidarBin(dir / "s.bin", scan);
  EXPECT_EQ(std::filesystem::file_size(dir / "s.bin"), 32u);
  EXPECT_EQ(readLidarBin(dir / "s.bin"), scan);
  writeText(dir / "t.bin", std::string(20, '\0'));
  EXPECT_THROW(readLidarBin(dir / "t.bin"), FormatError);
}

}  // namespace
}  // namespace semap
