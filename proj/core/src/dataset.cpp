#include "semap/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>

#include "semap/errors.hpp"

namespace fs = std::filesystem;

namespace semap {

ClassPalette::ClassPalette(std::vector<ClassInfo> classes) {
  std::sort(classes.begin(), classes.end(), [](const ClassInfo& a, const ClassInfo& b) { return a.id < b.id; });
  std::set<std::string> names;
  for (ClassInfo& info : classes) {
    if (info.name.empty()) throw std::invalid_argument("palette: empty class name");
    if (!names.insert(info.name).second) throw std::invalid_argument("palette: duplicate class name '" + info.name + "'");
    if (info.id == kVoidClass) {
      if (info.eval_included) throw std::invalid_argument("palette: void class 255 cannot be eval_included");
      void_entry_ = std::move(info);
      continue;
    }
    if (info.id != classes_.size()) {
      throw std::invalid_argument("palette: class ids must be contiguous from 0, got " + std::to_string(info.id));
    }
    classes_.push_back(std::move(info));
  }
  if (classes_.empty()) throw std::invalid_argument("palette: at least one class is required");
}

std::vector<bool> ClassPalette::evalMask() const {
  std::vector<bool> mask(classes_.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) mask[c] = classes_[c].eval_included;
  return mask;
}

std::optional<ClassId> ClassPalette::findByName(const std::string& name) const {
  for (const ClassInfo& info : classes_) {
    if (info.name == name) return info.id;
  }
  if (void_entry_ && void_entry_->name == name) return kVoidClass;
  return std::nullopt;
}

std::array<std::uint8_t, 3> ClassPalette::color(ClassId id) const {
  if (id < classes_.size()) return classes_[id].rgb;
  if (id == kVoidClass && void_entry_) return void_entry_->rgb;
  return {128, 128, 128};
}

bool SequenceDataset::hasRightLabels() const {
  return !keyframes.empty() &&
         std::all_of(keyframes.begin(), keyframes.end(), [](const Keyframe& kf) { return kf.labels_right.has_value(); });
}

bool SequenceDataset::hasImages() const {
  return !keyframes.empty() &&
         std::all_of(keyframes.begin(), keyframes.end(), [](const Keyframe& kf) { return kf.image_left.has_value(); });
}

bool SequenceDataset::hasRightImages() const {
  return !keyframes.empty() &&
         std::all_of(keyframes.begin(), keyframes.end(), [](const Keyframe& kf) { return kf.image_right.has_value(); });
}

std::size_t SequenceDataset::pointCount() const {
  std::size_t n = 0;
  for (const Keyframe& kf : keyframes) n += kf.points.size();
  return n;
}

namespace {

std::string kfName(const Keyframe& kf) { return "keyframe " + std::to_string(kf.id); }

void checkLabelMap(const LabelMap& map, const CameraIntrinsics& intr, std::size_t class_count,
                   const std::string& what) {
  if (map.width() != intr.width || map.height() != intr.height) {
    throw FormatError(what + ": size " + std::to_string(map.width()) + "x" + std::to_string(map.height()) +
                      " does not match calibration " + std::to_string(intr.width) + "x" + std::to_string(intr.height));
  }
  for (ClassId id : map.data()) {
    if (id >= class_count && id != kVoidClass) {
      throw FormatError(what + ": class id " + std::to_string(id) + " not in palette");
    }
  }
}

void checkImage(const GrayImage& image, const CameraIntrinsics& intr, const std::string& what) {
  if (image.width() != intr.width || image.height() != intr.height) {
    throw FormatError(what + ": image size does not match calibration");
  }
}

}  // namespace

void SequenceDataset::validate() const {
  try {
    rig.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("calibration: ") + e.what());
  }
  const CameraIntrinsics& intr = rig.intrinsics;
  const std::size_t class_count = palette.classCount();
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    const Keyframe& kf = keyframes[i];
    if (i > 0 && kf.id <= keyframes[i - 1].id) throw FormatError("keyframe ids must be strictly increasing");
    if (!kf.pose.isValid()) throw FormatError(kfName(kf) + ": pose rotation is not orthonormal");
    if (!kf.points.empty() && kf.labels_left.empty()) throw FormatError(kfName(kf) + ": points but no left label map");
    if (!kf.labels_left.empty()) checkLabelMap(kf.labels_left, intr, class_count, kfName(kf) + " left labels");
    if (kf.labels_right) checkLabelMap(*kf.labels_right, intr, class_count, kfName(kf) + " right labels");
    if (kf.gt2d) checkLabelMap(*kf.gt2d, intr, class_count, kfName(kf) + " gt2d");
    if (kf.image_left) checkImage(*kf.image_left, intr, kfName(kf) + " left image");
    if (kf.image_right) checkImage(*kf.image_right, intr, kfName(kf) + " right image");
    for (std::size_t p = 0; p < kf.points.size(); ++p) {
      const SparsePoint& sp = kf.points[p];
      if (sp.host_kf != kf.id) throw FormatError(kfName(kf) + ": point " + std::to_string(p) + " has wrong host");
      if (!(sp.inv_depth > 0.0) || !std::isfinite(sp.inv_depth)) {
        throw FormatError(kfName(kf) + ": point " + std::to_string(p) + " has non-positive inverse depth");
      }
      if (!intr.contains(sp.pixel())) {
        throw FormatError(kfName(kf) + ": point " + std::to_string(p) + " outside image");
      }
    }
    if (kf.lidar) {
      for (const LidarPoint& lp : kf.lidar->points) {
        if (!std::isfinite(lp.x) || !std::isfinite(lp.y) || !std::isfinite(lp.z)) {
          throw FormatError(kfName(kf) + ": non-finite lidar point");
        }
        if (lp.label >= class_count && lp.label != kVoidClass) {
          throw FormatError(kfName(kf) + ": lidar label " + std::to_string(lp.label) + " not in palette");
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Text parsing

namespace {

std::vector<std::string_view> splitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

class LineReader {
 public:
  explicit LineReader(const fs::path& path) : name_(path.filename().string()), in_(path) {
    if (!in_) throw IoError("cannot open " + path.string());
  }

  // Next non-empty, non-comment line split into fields; false at EOF.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      std::string_view view(line_);
      if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
      fields = splitFields(view);
      if (!fields.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError(name_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

  void expectCount(const std::vector<std::string_view>& fields, std::size_t n) const {
    if (fields.size() != n) fail("expected " + std::to_string(n) + " fields, got " + std::to_string(fields.size()));
  }

  double toDouble(std::string_view s) const {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
      fail("invalid number '" + std::string(s) + "'");
    }
    return value;
  }

  long toInt(std::string_view s) const {
    long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("invalid integer '" + std::string(s) + "'");
    return value;
  }

 private:
  std::string name_;
  std::ifstream in_;
  std::string line_;
  int line_no_ = 0;
};

std::string formatDouble(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

StereoRig loadCalib(const fs::path& path) {
  LineReader reader(path);
  std::vector<std::string_view> f;
  if (!reader.next(f)) throw FormatError(path.filename().string() + ": empty file");
  reader.expectCount(f, 7);
  StereoRig rig;
  rig.intrinsics.fx = reader.toDouble(f[0]);
  rig.intrinsics.fy = reader.toDouble(f[1]);
  rig.intrinsics.cx = reader.toDouble(f[2]);
  rig.intrinsics.cy = reader.toDouble(f[3]);
  rig.intrinsics.width = static_cast<int>(reader.toInt(f[4]));
  rig.intrinsics.height = static_cast<int>(reader.toInt(f[5]));
  rig.baseline = reader.toDouble(f[6]);
  return rig;
}

// Text poses often carry few digits; small deviations are projected back onto SO(3).
Pose orthonormalize(const Pose& pose) {
  Eigen::JacobiSVD<Mat3> svd(pose.rotation(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  return Pose(r, pose.translation());
}

std::vector<Keyframe> loadPoses(const fs::path& path) {
  LineReader reader(path);
  std::vector<Keyframe> keyframes;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    reader.expectCount(f, 13);
    Keyframe kf;
    kf.id = static_cast<int>(reader.toInt(f[0]));
    std::array<double, 12> m{};
    for (int k = 0; k < 12; ++k) m[k] = reader.toDouble(f[k + 1]);
    kf.pose = Pose::fromRowMajor(m);
    if (!kf.pose.isValid()) {
      if (!kf.pose.isValid(1e-5)) reader.fail("rotation is not orthonormal");
      kf.pose = orthonormalize(kf.pose);
    }
    if (!keyframes.empty() && kf.id <= keyframes.back().id) reader.fail("keyframe ids must be strictly increasing");
    keyframes.push_back(std::move(kf));
  }
  return keyframes;
}

std::vector<SparsePoint> loadPoints(const fs::path& path, int host) {
  LineReader reader(path);
  std::vector<SparsePoint> points;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    reader.expectCount(f, 3);
    SparsePoint p;
    p.host_kf = host;
    p.u = reader.toDouble(f[0]);
    p.v = reader.toDouble(f[1]);
    p.inv_depth = reader.toDouble(f[2]);
    if (!(p.inv_depth > 0.0)) reader.fail("inverse depth must be positive");
    points.push_back(p);
  }
  return points;
}

template <typename T, typename Fn>
std::optional<T> loadIfExists(const fs::path& path, Fn&& fn) {
  if (!fs::exists(path)) return std::nullopt;
  return fn(path);
}

void writeTextFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

ClassPalette loadPalette(const fs::path& path) {
  LineReader reader(path);
  std::vector<ClassInfo> classes;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    reader.expectCount(f, 6);
    ClassInfo info;
    const long id = reader.toInt(f[0]);
    if (id < 0 || id > 255) reader.fail("class id out of range");
    info.id = static_cast<ClassId>(id);
    info.name = std::string(f[1]);
    for (int k = 0; k < 3; ++k) {
      const long c = reader.toInt(f[2 + k]);
      if (c < 0 || c > 255) reader.fail("color component out of range");
      info.rgb[k] = static_cast<std::uint8_t>(c);
    }
    const long eval = reader.toInt(f[5]);
    if (eval != 0 && eval != 1) reader.fail("eval_included must be 0 or 1");
    info.eval_included = eval == 1;
    classes.push_back(std::move(info));
  }
  try {
    return ClassPalette(std::move(classes));
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.filename().string() + ": " + e.what());
  }
}

void savePalette(const ClassPalette& palette, const fs::path& path) {
  std::ostringstream os;
  auto line = [&os](const ClassInfo& c) {
    os << int(c.id) << ' ' << c.name << ' ' << int(c.rgb[0]) << ' ' << int(c.rgb[1]) << ' ' << int(c.rgb[2]) << ' '
       << (c.eval_included ? 1 : 0) << '\n';
  };
  for (const ClassInfo& c : palette.classes()) line(c);
  if (palette.voidEntry()) line(*palette.voidEntry());
  writeTextFile(path, os.str());
}

LidarScan readLidarBin(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 16 != 0) {
    throw FormatError(path.filename().string() + ": size " + std::to_string(bytes.size()) + " is not a multiple of 16");
  }
  static_assert(std::endian::native == std::endian::little, "lidar reader assumes a little-endian host");
  LidarScan scan;
  scan.points.resize(bytes.size() / 16);
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const char* rec = bytes.data() + 16 * i;
    LidarPoint& p = scan.points[i];
    std::memcpy(&p.x, rec, 4);
    std::memcpy(&p.y, rec + 4, 4);
    std::memcpy(&p.z, rec + 8, 4);
    std::memcpy(&p.label, rec + 12, 4);
  }
  return scan;
}

void writeLidarBin(const fs::path& path, const LidarScan& scan) {
  std::vector<char> bytes(scan.points.size() * 16);
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    char* rec = bytes.data() + 16 * i;
    const LidarPoint& p = scan.points[i];
    std::memcpy(rec, &p.x, 4);
    std::memcpy(rec + 4, &p.y, 4);
    std::memcpy(rec + 8, &p.z, 4);
    std::memcpy(rec + 12, &p.label, 4);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

SequenceDataset loadSequence(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("sequence directory not found: " + dir.string());
  for (const char* required : {"calib.txt", "poses.txt", "palette.txt"}) {
    if (!fs::exists(dir / required)) throw FormatError(std::string(required) + ": missing in " + dir.string());
  }

  SequenceDataset ds;
  ds.rig = loadCalib(dir / "calib.txt");
  ds.palette = loadPalette(dir / "palette.txt");
  ds.keyframes = loadPoses(dir / "poses.txt");

  for (Keyframe& kf : ds.keyframes) {
    const std::string id = std::to_string(kf.id);
    if (auto pts = loadIfExists<std::vector<SparsePoint>>(dir / "points" / (id + ".txt"),
                                                          [&](const fs::path& p) { return loadPoints(p, kf.id); })) {
      kf.points = std::move(*pts);
    }
    if (auto left = loadIfExists<LabelMap>(dir / "labels" / "left" / (id + ".png"), readLabelPng)) {
      kf.labels_left = std::move(*left);
    }
    kf.labels_right = loadIfExists<LabelMap>(dir / "labels" / "right" / (id + ".png"), readLabelPng);
    kf.image_left = loadIfExists<GrayImage>(dir / "images" / "left" / (id + ".png"), readGrayPng);
    kf.image_right = loadIfExists<GrayImage>(dir / "images" / "right" / (id + ".png"), readGrayPng);
    kf.lidar = loadIfExists<LidarScan>(dir / "lidar" / (id + ".bin"), readLidarBin);
    kf.gt2d = loadIfExists<LabelMap>(dir / "gt2d" / (id + ".png"), readLabelPng);
  }
  ds.validate();
  return ds;
}

void saveSequence(const SequenceDataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir / "points");
  fs::create_directories(dir / "labels" / "left");

  const CameraIntrinsics& intr = ds.rig.intrinsics;
  writeTextFile(dir / "calib.txt", formatDouble(intr.fx) + ' ' + formatDouble(intr.fy) + ' ' + formatDouble(intr.cx) +
                                       ' ' + formatDouble(intr.cy) + ' ' + std::to_string(intr.width) + ' ' +
                                       std::to_string(intr.height) + ' ' + formatDouble(ds.rig.baseline) + '\n');
  savePalette(ds.palette, dir / "palette.txt");

  std::ostringstream poses;
  for (const Keyframe& kf : ds.keyframes) {
    poses << kf.id;
    for (double v : kf.pose.toRowMajor()) poses << ' ' << formatDouble(v);
    poses << '\n';
  }
  writeTextFile(dir / "poses.txt", poses.str());

  auto ensure = [&dir](const fs::path& sub) {
    fs::create_directories(dir / sub);
    return dir / sub;
  };
  for (const Keyframe& kf : ds.keyframes) {
    const std::string id = std::to_string(kf.id);
    std::ostringstream pts;
    for (const SparsePoint& p : kf.points) {
      pts << formatDouble(p.u) << ' ' << formatDouble(p.v) << ' ' << formatDouble(p.inv_depth) << '\n';
    }
    writeTextFile(dir / "points" / (id + ".txt"), pts.str());
    if (!kf.labels_left.empty()) writeLabelPng(dir / "labels" / "left" / (id + ".png"), kf.labels_left);
    if (kf.labels_right) writeLabelPng(ensure("labels/right") / (id + ".png"), *kf.labels_right);
    if (kf.image_left) writeGrayPng(ensure("images/left") / (id + ".png"), *kf.image_left);
    if (kf.image_right) writeGrayPng(ensure("images/right") / (id + ".png"), *kf.image_right);
    if (kf.lidar) writeLidarBin(ensure("lidar") / (id + ".bin"), *kf.lidar);
    if (kf.gt2d) writeLabelPng(ensure("gt2d") / (id + ".png"), *kf.gt2d);
  }
}

}  // namespace semap
