#include "semap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <utility>

namespace semap::synth {

namespace {

constexpr double kRayEps = 1e-9;

// Other two axes of `axis`, increasing.
std::pair<int, int> otherAxes(int axis) {
  switch (axis) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Vec3 cameraRay(const CameraIntrinsics& intr, double u, double v) {
  return Vec3((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
}

}  // namespace

double Texture::intensity(const Vec3& p) const {
  switch (kind) {
    case TextureKind::kConstant: return base;
    case TextureKind::kRamp: return base + gradient.dot(p);
    case TextureKind::kChecker: {
      const long parity = static_cast<long>(std::floor(p.x() / cell)) + static_cast<long>(std::floor(p.y() / cell)) +
                          static_cast<long>(std::floor(p.z() / cell));
      return base + ((parity & 1) ? amplitude : -amplitude);
    }
  }
  return base;
}

void SceneSpec::validate(std::size_t class_count) const {
  for (const AxisPlane& p : planes) {
    if (p.axis < 0 || p.axis > 2) throw std::invalid_argument("plane axis must be 0, 1 or 2");
    if (!(p.lo.x() < p.hi.x()) || !(p.lo.y() < p.hi.y())) throw std::invalid_argument("plane has empty bounds");
    if (p.label >= class_count) throw std::invalid_argument("plane class id outside palette");
  }
  for (const Box& b : boxes) {
    if (!((b.max - b.min).array() > 0.0).all()) throw std::invalid_argument("box has zero or negative extent");
    if (b.label >= class_count) throw std::invalid_argument("box class id outside palette");
  }
}

std::optional<SurfaceHit> castRay(const SceneSpec& scene, const Vec3& o, const Vec3& d) {
  SurfaceHit best;
  best.t = std::numeric_limits<double>::infinity();
  bool found = false;

  for (const AxisPlane& plane : scene.planes) {
    const int a = plane.axis;
    if (d[a] == 0.0) continue;
    const double t = (plane.offset - o[a]) / d[a];
    if (!(t > kRayEps) || t >= best.t) continue;
    Vec3 p = o + t * d;
    p[a] = plane.offset;
    const auto [a1, a2] = otherAxes(a);
    if (p[a1] < plane.lo.x() || p[a1] > plane.hi.x() || p[a2] < plane.lo.y() || p[a2] > plane.hi.y()) continue;
    best = {t, p, plane.label, plane.texture.intensity(p)};
    found = true;
  }

  for (const Box& box : scene.boxes) {
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    int near_axis = -1;
    int far_axis = -1;
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (d[a] == 0.0) {
        miss = o[a] < box.min[a] || o[a] > box.max[a];
        continue;
      }
      double t0 = (box.min[a] - o[a]) / d[a];
      double t1 = (box.max[a] - o[a]) / d[a];
      if (t0 > t1) std::swap(t0, t1);
      if (t0 > t_near) {
        t_near = t0;
        near_axis = a;
      }
      if (t1 < t_far) {
        t_far = t1;
        far_axis = a;
      }
      miss = t_near > t_far;
    }
    if (miss) continue;
    double t = t_near;
    int face = near_axis;
    if (!(t > kRayEps)) {
      t = t_far;
      face = far_axis;
    }
    if (!(t > kRayEps) || t >= best.t || face < 0) continue;
    Vec3 p = o + t * d;
    p[face] = (std::abs(p[face] - box.min[face]) < std::abs(p[face] - box.max[face])) ? box.min[face] : box.max[face];
    best = {t, p, box.label, box.texture.intensity(p)};
    found = true;
  }

  if (!found) return std::nullopt;
  return best;
}

namespace {

struct Render {
  LabelMap labels;
  GrayImage image;
};

Render renderView(const SceneSpec& scene, const Pose& pose, const Vec3& center, const CameraIntrinsics& intr,
                  bool with_image) {
  Render r{LabelMap(intr.width, intr.height), with_image ? GrayImage(intr.width, intr.height) : GrayImage()};
  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) {
      const auto hit = castRay(scene, center, pose.rotation() * cameraRay(intr, x, y));
      if (!hit) continue;
      r.labels.at(x, y) = hit->label;
      if (with_image) r.image.at(x, y) = static_cast<float>(hit->intensity);
    }
  }
  return r;
}

bool labelAt(const LabelMap& map, const Pixel& p, ClassId& out) {
  const double ur = std::round(p.u);
  const double vr = std::round(p.v);
  if (ur < 0.0 || vr < 0.0 || ur >= map.width() || vr >= map.height()) return false;
  out = map.at(static_cast<int>(ur), static_cast<int>(vr));
  return true;
}

// Every visible projection (left and right, all keyframes) lands on `label`.
bool consistentEverywhere(const Vec3& world, ClassId label, std::size_t host, const SequenceDataset& ds,
                          const ProjectionConfig& proj_cfg) {
  const CameraIntrinsics& intr = ds.rig.intrinsics;
  for (std::size_t j = 0; j < ds.keyframes.size(); ++j) {
    const Keyframe& kf = ds.keyframes[j];
    const Vec3 pc = kf.pose.rotation().transpose() * (world - kf.pose.translation());
    const auto left = project(pc, intr, proj_cfg);
    if (!left) continue;
    ClassId seen = kVoidClass;
    if (j != host && (!labelAt(kf.labels_left, left->pixel, seen) || seen != label)) return false;
    if (const auto right = projectToRight(left->pixel, left->inv_depth, ds.rig, proj_cfg)) {
      if (!labelAt(*kf.labels_right, right->pixel, seen) || seen != label) return false;
    }
  }
  return true;
}

bool clearOfBoundaries(const LabelMap& map, int u, int v, int radius, ClassId label) {
  for (int y = std::max(0, v - radius); y <= std::min(map.height() - 1, v + radius); ++y) {
    for (int x = std::max(0, u - radius); x <= std::min(map.width() - 1, u + radius); ++x) {
      if (map.at(x, y) != label) return false;
    }
  }
  return true;
}

}  // namespace

GeneratedSequence generate(const SceneSpec& scene, const std::vector<Pose>& trajectory, const StereoRig& rig,
                           const ClassPalette& palette, const GeneratorOptions& options) {
  rig.validate();
  scene.validate(palette.classCount());
  const CameraIntrinsics& intr = rig.intrinsics;
  const int border = std::max(0, options.point_border);
  if (2 * border >= intr.width || 2 * border >= intr.height) throw std::invalid_argument("point border too large");

  GeneratedSequence out;
  SequenceDataset& ds = out.dataset;
  ds.rig = rig;
  ds.palette = palette;
  ds.keyframes.resize(trajectory.size());

  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    Keyframe& kf = ds.keyframes[k];
    kf.id = static_cast<int>(k);
    kf.pose = trajectory[k];
    const Vec3 left_center = kf.pose.translation();
    const Vec3 right_center = kf.pose.apply(Vec3(rig.baseline, 0.0, 0.0));
    Render left = renderView(scene, kf.pose, left_center, intr, options.render_images);
    Render right = renderView(scene, kf.pose, right_center, intr, options.render_right_images);
    kf.labels_left = left.labels;
    kf.gt2d = std::move(left.labels);
    kf.labels_right = std::move(right.labels);
    if (options.render_images) kf.image_left = std::move(left.image);
    if (options.render_right_images) kf.image_right = std::move(right.image);
  }

  out.true_labels.resize(trajectory.size());
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    Keyframe& kf = ds.keyframes[k];
    std::mt19937_64 rng(mixSeed(options.seed, k, 0x706f696e74ULL));
    const int span_u = intr.width - 2 * border;
    const int span_v = intr.height - 2 * border;
    std::set<std::pair<int, int>> used;
    const std::size_t max_attempts = 200 * std::max<std::size_t>(options.points_per_kf, 1);
    std::size_t attempts = 0;
    while (kf.points.size() < options.points_per_kf) {
      if (++attempts > max_attempts) {
        throw GenerationError("keyframe " + std::to_string(kf.id) + ": found only " +
                              std::to_string(kf.points.size()) + " of " + std::to_string(options.points_per_kf) +
                              " points on scene surfaces");
      }
      const int u = border + static_cast<int>(uniform01(rng) * span_u);
      const int v = border + static_cast<int>(uniform01(rng) * span_v);
      if (!used.insert({u, v}).second) continue;
      const auto hit = castRay(scene, kf.pose.translation(), kf.pose.rotation() * cameraRay(intr, u, v));
      if (!hit) continue;
      if (!clearOfBoundaries(kf.labels_left, u, v, options.boundary_clearance_px, hit->label)) continue;
      if (options.consistent_points && !consistentEverywhere(hit->point, hit->label, k, ds, options.projection)) {
        continue;
      }
      kf.points.push_back(SparsePoint{kf.id, static_cast<double>(u), static_cast<double>(v), 1.0 / hit->t});
      out.true_labels[k].push_back(hit->label);
    }

    if (options.lidar_points_per_kf > 0) {
      std::mt19937_64 lidar_rng(mixSeed(options.seed, k, 0x6c69646172ULL));
      LidarScan scan;
      scan.points.reserve(options.lidar_points_per_kf);
      for (std::size_t n = 0; n < options.lidar_points_per_kf; ++n) {
        const double u = uniform01(lidar_rng) * (intr.width - 1);
        const double v = uniform01(lidar_rng) * (intr.height - 1);
        const Vec3 ray = cameraRay(intr, u, v);
        const auto hit = castRay(scene, kf.pose.translation(), kf.pose.rotation() * ray);
        if (!hit) continue;
        const Vec3 pc = ray * hit->t;
        scan.points.push_back(LidarPoint{static_cast<float>(pc.x()), static_cast<float>(pc.y()),
                                         static_cast<float>(pc.z()), hit->label});
      }
      kf.lidar = std::move(scan);
    }
  }
  return out;
}

void NoiseModel::validate() const {
  auto ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!ok(flip_rate) || !ok(boundary_flip_rate)) throw std::invalid_argument("flip rates must lie in [0, 1]");
  if (boundary_band_px < 0) throw std::invalid_argument("boundary band must be >= 0");
}

namespace {

// Pixels within `band` (Chebyshev) of a label change.
std::vector<bool> boundaryBand(const LabelMap& map, int band) {
  const int w = map.width();
  const int h = map.height();
  std::vector<bool> edge(static_cast<std::size_t>(w) * h, false);
  if (band <= 0) return edge;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const ClassId c = map.at(x, y);
      if ((x + 1 < w && map.at(x + 1, y) != c) || (y + 1 < h && map.at(x, y + 1) != c)) {
        edge[static_cast<std::size_t>(y) * w + x] = true;
        if (x + 1 < w && map.at(x + 1, y) != c) edge[static_cast<std::size_t>(y) * w + x + 1] = true;
        if (y + 1 < h && map.at(x, y + 1) != c) edge[static_cast<std::size_t>(y + 1) * w + x] = true;
      }
    }
  }
  // Dilate the 2-pixel-wide edge by band-1 in each direction.
  const int r = band - 1;
  std::vector<bool> rows(edge.size(), false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int dx = -r; dx <= r; ++dx) {
        const int xx = x + dx;
        if (xx >= 0 && xx < w && edge[static_cast<std::size_t>(y) * w + xx]) {
          rows[static_cast<std::size_t>(y) * w + x] = true;
          break;
        }
      }
    }
  }
  std::vector<bool> out(edge.size(), false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = y + dy;
        if (yy >= 0 && yy < h && rows[static_cast<std::size_t>(yy) * w + x]) {
          out[static_cast<std::size_t>(y) * w + x] = true;
          break;
        }
      }
    }
  }
  return out;
}

void corruptMap(LabelMap& map, const NoiseModel& noise, std::size_t class_count, std::uint64_t seed,
                CorruptionStats& stats) {
  const std::vector<bool> band = boundaryBand(map, noise.boundary_band_px);
  const LabelMap clean = map;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < map.data().size(); ++i) {
    const ClassId c = clean.data()[i];
    if (c == kVoidClass || class_count < 2) continue;
    ++stats.eligible;
    const double rate = band[i] ? noise.boundary_flip_rate : noise.flip_rate;
    if (!(uniform01(rng) < rate)) continue;
    auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(class_count - 1));
    if (pick >= c) ++pick;
    map.data()[i] = static_cast<ClassId>(pick);
    ++stats.flipped;
  }
}

}  // namespace

SequenceDataset corrupt(const SequenceDataset& ds, const NoiseModel& noise, CorruptionStats* stats) {
  noise.validate();
  SequenceDataset out = ds;
  CorruptionStats local;
  const std::size_t class_count = ds.palette.classCount();
  for (std::size_t k = 0; k < out.keyframes.size(); ++k) {
    Keyframe& kf = out.keyframes[k];
    if (!kf.labels_left.empty()) corruptMap(kf.labels_left, noise, class_count, mixSeed(noise.seed, k, 0), local);
    if (kf.labels_right) corruptMap(*kf.labels_right, noise, class_count, mixSeed(noise.seed, k, 1), local);
  }
  if (stats) *stats = local;
  return out;
}

std::optional<ScenePreset> presetFromString(const std::string& name) {
  if (name == "plane") return ScenePreset::kPlane;
  if (name == "street") return ScenePreset::kStreet;
  if (name == "boxes") return ScenePreset::kBoxes;
  return std::nullopt;
}

ClassPalette defaultPalette() {
  return ClassPalette({
      {0, "road", {128, 64, 128}, true},
      {1, "sidewalk", {244, 35, 232}, true},
      {2, "building", {70, 70, 70}, true},
      {3, "wall", {102, 102, 156}, true},
      {4, "fence", {190, 153, 153}, true},
      {5, "pole", {153, 153, 153}, true},
      {6, "traffic_sign", {220, 220, 0}, true},
      {7, "vegetation", {107, 142, 35}, true},
      {8, "car", {0, 0, 142}, true},
      {9, "terrain", {152, 251, 152}, true},
      {kVoidClass, "void", {0, 0, 0}, false},
  });
}

namespace {

enum Cls : ClassId { kRoad, kSidewalk, kBuilding, kWall, kFence, kPole, kSign, kVegetation, kCar, kTerrain };

constexpr double kInf = 1e300;

AxisPlane plane(int axis, double offset, Eigen::Vector2d lo, Eigen::Vector2d hi, ClassId label, Texture tex) {
  return AxisPlane{axis, offset, lo, hi, label, tex};
}

Texture checkerFor(ClassId c) { return Texture::checker(60.0 + 15.0 * c, 20.0, 0.5 + 0.1 * c); }

StereoRig defaultRig() {
  StereoRig rig;
  rig.intrinsics = CameraIntrinsics{400.0, 400.0, 320.0, 240.0, 640, 480};
  rig.baseline = 0.5;
  return rig;
}

SceneSetup streetScene(std::size_t keyframes) {
  SceneSetup s;
  s.rig = defaultRig();
  s.palette = defaultPalette();
  auto& planes = s.scene.planes;
  auto& boxes = s.scene.boxes;
  // y points down; the camera rides 1.5 m above the road.
  planes.push_back(plane(1, 1.5, {-4.0, -kInf}, {4.0, kInf}, kRoad, checkerFor(kRoad)));
  planes.push_back(plane(1, 1.35, {-7.0, -kInf}, {-4.0, kInf}, kSidewalk, checkerFor(kSidewalk)));
  planes.push_back(plane(1, 1.35, {4.0, -kInf}, {7.0, 30.0}, kSidewalk, checkerFor(kSidewalk)));
  planes.push_back(plane(1, 1.35, {4.0, 45.0}, {7.0, kInf}, kSidewalk, checkerFor(kSidewalk)));
  planes.push_back(plane(1, 1.4, {4.0, 30.0}, {7.0, 45.0}, kTerrain, checkerFor(kTerrain)));
  planes.push_back(plane(0, -7.0, {-12.0, -kInf}, {1.35, kInf}, kBuilding, checkerFor(kBuilding)));
  planes.push_back(plane(0, 7.0, {-12.0, -kInf}, {1.35, kInf}, kBuilding, checkerFor(kBuilding)));
  planes.push_back(plane(0, -6.9, {0.0, 18.0}, {1.35, 34.0}, kWall, checkerFor(kWall)));
  planes.push_back(plane(0, 6.8, {0.4, 50.0}, {1.35, 68.0}, kFence, checkerFor(kFence)));
  // Far facade beyond LiDAR range.
  planes.push_back(plane(2, 130.0, {-kInf, -30.0}, {kInf, 1.5}, kBuilding, checkerFor(kBuilding)));

  for (int i = 0; i < 10; ++i) {
    const double z = 8.0 + 9.0 * i;
    boxes.push_back(Box{Vec3(4.2, -3.0, z), Vec3(4.45, 1.35, z + 0.25), kPole, checkerFor(kPole)});
    if (i % 2 == 0) {
      boxes.push_back(Box{Vec3(4.05, -3.9, z - 0.3), Vec3(4.6, -3.0, z + 0.55), kSign, checkerFor(kSign)});
    }
  }
  for (int i = 0; i < 6; ++i) {
    const double z = 12.0 + 13.0 * i;
    const double x0 = (i % 2 == 0) ? 2.1 : -3.9;
    boxes.push_back(Box{Vec3(x0, 0.0, z), Vec3(x0 + 1.8, 1.5, z + 4.2), kCar, checkerFor(kCar)});
  }
  for (int i = 0; i < 5; ++i) {
    const double z = 20.0 + 16.0 * i;
    boxes.push_back(Box{Vec3(-6.8, -0.8, z), Vec3(-5.2, 1.35, z + 3.0), kVegetation, checkerFor(kVegetation)});
  }

  for (std::size_t k = 0; k < keyframes; ++k) {
    const double yaw = 0.02 * std::sin(0.5 * static_cast<double>(k));
    s.trajectory.emplace_back(rotationFromAxisAngle(Vec3(0.0, yaw, 0.0)), Vec3(0.0, 0.0, static_cast<double>(k)));
  }
  return s;
}

SceneSetup planeScene(std::size_t keyframes) {
  SceneSetup s;
  s.rig = defaultRig();
  s.palette = defaultPalette();
  const double distance = 12.0 + 0.5 * static_cast<double>(keyframes);
  s.scene.planes.push_back(
      plane(2, distance, {-kInf, -kInf}, {kInf, kInf}, kRoad, Texture::ramp(128.0, Vec3(6.0, 4.0, 0.0))));
  for (std::size_t k = 0; k < keyframes; ++k) {
    const double kk = static_cast<double>(k);
    s.trajectory.emplace_back(Mat3::Identity(), Vec3(0.1 * kk, 0.0, 0.5 * kk));
  }
  return s;
}

SceneSetup boxesScene(std::size_t keyframes) {
  SceneSetup s;
  s.rig = defaultRig();
  s.palette = defaultPalette();
  s.scene.planes.push_back(plane(2, 40.0, {-kInf, -kInf}, {kInf, 1.5}, kBuilding, checkerFor(kBuilding)));
  s.scene.planes.push_back(plane(1, 1.5, {-kInf, -kInf}, {kInf, 40.0}, kRoad, checkerFor(kRoad)));
  const ClassId classes[] = {kCar, kVegetation, kWall, kFence, kPole, kSign, kTerrain, kSidewalk};
  for (int i = 0; i < 8; ++i) {
    const double x = -9.0 + 2.4 * i;
    const double z = 12.0 + 3.0 * (i % 4);
    const double top = -0.5 - 0.4 * (i % 3);
    s.scene.boxes.push_back(Box{Vec3(x, top, z), Vec3(x + 1.6, 1.5, z + 1.6), classes[i], checkerFor(classes[i])});
  }
  for (std::size_t k = 0; k < keyframes; ++k) {
    const double kk = static_cast<double>(k);
    s.trajectory.emplace_back(Mat3::Identity(), Vec3(-0.15 * static_cast<double>(keyframes) / 2 + 0.15 * kk, 0.0, 0.0));
  }
  return s;
}

}  // namespace

SceneSetup makePreset(ScenePreset preset, std::size_t keyframes) {
  switch (preset) {
    case ScenePreset::kPlane: return planeScene(keyframes);
    case ScenePreset::kStreet: return streetScene(keyframes);
    case ScenePreset::kBoxes: return boxesScene(keyframes);
  }
  throw std::invalid_argument("unknown scene preset");
}

}  // namespace semap::synth
