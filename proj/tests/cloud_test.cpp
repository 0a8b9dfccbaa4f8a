#include <cstring>

#include <gtest/gtest.h>

#include "semap/cloud.hpp"
#include "semap/errors.hpp"
#include "test_support.hpp"

namespace semap {
namespace {

using testing::TempDir;

PointCloud sampleCloud() {
  PointCloud cloud;
  cloud.push_back({Vec3(1.0, 2.0, 3.0), 0, {128, 64, 128}, 0});
  cloud.push_back({Vec3(-1.25, 0.5, 40.0), 1, {244, 35, 232}, 0});
  cloud.push_back({Vec3(0.1, 0.2, 0.3), kUnlabeledMarker, kUnlabeledColor, 1});
  cloud.push_back({Vec3(5.0, -6.0, 7.0), 8, {0, 0, 142}, 2});
  return cloud;
}

TEST(BuildCloud, IdentityHostPose) {
  SequenceDataset ds;
  ds.rig = testing::testRig();
  ds.palette = synth::defaultPalette();
  Keyframe kf;
  kf.labels_left = LabelMap(640, 480, 0);
  kf.points = {{0, 320.0, 240.0, 0.5}, {0, 10.0, 10.0, 0.1}};
  ds.keyframes.push_back(kf);
  LabelAssignment labels{{{ClassId{8}, std::nullopt}}};
  const PointCloud cloud = buildCloud(ds, labels);
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud[0].position, Vec3(0.0, 0.0, 2.0));
  EXPECT_EQ(cloud[0].label, 8);
  EXPECT_EQ(cloud[0].rgb, (std::array<std::uint8_t, 3>{0, 0, 142}));
  EXPECT_EQ(cloud[1].label, kUnlabeledMarker);
  EXPECT_EQ(cloud[1].rgb, kUnlabeledColor);
  EXPECT_THROW(buildCloud(ds, LabelAssignment{{{ClassId{0}}}}), std::invalid_argument);
}

TEST(BuildCloud, PlaneScenePositionsOnPlane) {
  synth::SceneSetup setup = synth::makePreset(synth::ScenePreset::kPlane, 6);
  setup.rig.intrinsics = CameraIntrinsics{100.0, 100.0, 80.0, 60.0, 160, 120};
  synth::GeneratorOptions opt;
  opt.points_per_kf = 80;
  const synth::GeneratedSequence seq = synth::generate(setup.scene, setup.trajectory, setup.rig, setup.palette, opt);
  const double plane_z = setup.scene.planes[0].offset;
  const PointCloud cloud = buildCloud(seq.dataset, baselineLabels(seq.dataset));
  EXPECT_EQ(cloud.size(), seq.dataset.pointCount());
  for (const LabeledPoint& p : cloud) EXPECT_NEAR(p.position.z(), plane_z, 1e-9);
}

TEST(Ply, HeaderAndRoundTrip) {
  TempDir dir;
  const PointCloud cloud = sampleCloud();
  writePly(dir / "map.ply", cloud);
  const std::string bytes = testing::readFile(dir / "map.ply");
  const std::string header =
      "ply\nformat binary_little_endian 1.0\nelement vertex 4\n"
      "property float x\nproperty float y\nproperty float z\n"
      "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar label\nend_header\n";
  ASSERT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_EQ(bytes.size(), header.size() + 4 * 16);
  float x = 0.0f;
  std::memcpy(&x, bytes.data() + header.size() + 16, 4);
  EXPECT_EQ(x, -1.25f);

  const PointCloud back = readPly(dir / "map.ply");
  ASSERT_EQ(back.size(), cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_EQ(back[i].position, cloud[i].position.cast<float>().cast<double>());
    EXPECT_EQ(back[i].label, cloud[i].label);
    EXPECT_EQ(back[i].rgb, cloud[i].rgb);
  }
}

TEST(Ply, EmptyCloud) {
  TempDir dir;
  writePly(dir / "empty.ply", {});
  EXPECT_NE(testing::readFile(dir / "empty.ply").find("element vertex 0\n"), std::string::npos);
  EXPECT_TRUE(readPly(dir / "empty.ply").empty());
}

TEST(Ply, FilterKeepsOnlyListedClasses) {
  TempDir dir;
  const std::set<ClassId> filter = {0, 1};
  writePly(dir / "street.ply", sampleCloud(), filter);
  const PointCloud back = readPly(dir / "street.ply");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(countPassing(sampleCloud(), filter), 2u);
  for (const LabeledPoint& p : back) EXPECT_TRUE(filter.count(p.label));
}

TEST(Ply, ReadsAsciiAndRejectsGarbage) {
  TempDir dir;
  testing::writeText(dir / "a.ply",
                     "ply\nformat ascii 1.0\ncomment hand written\nelement vertex 2\nproperty float x\n"
                     "property float y\nproperty float z\nelement face 0\nproperty list uchar int vertex_indices\n"
                     "end_header\n1 2 3\n4 5 6\n");
  const PointCloud cloud = readPly(dir / "a.ply");
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud[1].position, Vec3(4.0, 5.0, 6.0));
  EXPECT_EQ(cloud[1].label, kUnlabeledMarker);

  testing::writeText(dir / "b.ply", "ply\nformat binary_big_endian 1.0\nend_header\n");
  EXPECT_THROW(readPly(dir / "b.ply"), FormatError);
  testing::writeText(dir / "c.ply",
                     "ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty float x\n"
                     "property float y\nproperty float z\nend_header\n");
  EXPECT_THROW(readPly(dir / "c.ply"), FormatError);
  EXPECT_THROW(writePly(dir / "missing" / "x.ply", sampleCloud()), IoError);
}

TEST(Merge, TransformAndConcatenate) {
  const PointCloud a = sampleCloud();
  EXPECT_EQ(mergeClouds({a}, {Pose()}).size(), a.size());
  const PointCloud twice = mergeClouds({a, a}, {Pose(), Pose()});
  ASSERT_EQ(twice.size(), 2 * a.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(twice[i + a.size()].position, twice[i].position);

  const Pose shift(Mat3::Identity(), Vec3(10.0, 0.0, 0.0));
  const PointCloud moved = mergeClouds({a, a}, {Pose(), shift});
  EXPECT_EQ(moved[a.size()].position, a[0].position + Vec3(10.0, 0.0, 0.0));
  EXPECT_EQ(moved[a.size()].label, a[0].label);
  EXPECT_THROW(mergeClouds({a, a}, {Pose()}), std::invalid_argument);
}

}  // namespace
}  // namespace semap
