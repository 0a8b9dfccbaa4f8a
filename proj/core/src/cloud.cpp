#include "semap/cloud.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "semap/errors.hpp"

namespace semap {

PointCloud buildCloud(const SequenceDataset& ds, const LabelAssignment& labels) {
  if (labels.labels.size() != ds.keyframes.size()) {
    throw std::invalid_argument("label assignment does not match dataset keyframes");
  }
  PointCloud cloud;
  cloud.reserve(ds.pointCount());
  for (std::size_t k = 0; k < ds.keyframes.size(); ++k) {
    const Keyframe& kf = ds.keyframes[k];
    if (labels.labels[k].size() != kf.points.size()) {
      throw std::invalid_argument("label assignment does not cover keyframe " + std::to_string(kf.id));
    }
    for (std::size_t i = 0; i < kf.points.size(); ++i) {
      const SparsePoint& p = kf.points[i];
      LabeledPoint lp;
      lp.position = kf.pose.apply(unproject(p.pixel(), p.inv_depth, ds.rig.intrinsics));
      lp.source_kf = kf.id;
      if (const PointLabel& label = labels.labels[k][i]) {
        lp.label = *label;
        lp.rgb = ds.palette.color(*label);
      }
      cloud.push_back(lp);
    }
  }
  return cloud;
}

PointCloud mergeClouds(const std::vector<PointCloud>& clouds, const std::vector<Pose>& transforms) {
  if (clouds.size() != transforms.size()) {
    throw std::invalid_argument("merge: " + std::to_string(clouds.size()) + " clouds but " +
                                std::to_string(transforms.size()) + " transforms");
  }
  PointCloud out;
  std::size_t total = 0;
  for (const PointCloud& c : clouds) total += c.size();
  out.reserve(total);
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    for (LabeledPoint p : clouds[i]) {
      p.position = transforms[i].apply(p.position);
      out.push_back(p);
    }
  }
  return out;
}

namespace {

bool passes(const LabeledPoint& p, const std::optional<std::set<ClassId>>& filter) {
  if (!filter) return true;
  return p.label != kUnlabeledMarker && filter->count(p.label) > 0;
}

}  // namespace

std::size_t countPassing(const PointCloud& cloud, const std::optional<std::set<ClassId>>& filter) {
  std::size_t n = 0;
  for (const LabeledPoint& p : cloud) n += passes(p, filter) ? 1 : 0;
  return n;
}

void writePly(const std::filesystem::path& path, const PointCloud& cloud,
              const std::optional<std::set<ClassId>>& filter) {
  static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");
  const std::size_t count = countPassing(cloud, filter);
  std::ostringstream header;
  header << "ply\n"
         << "format binary_little_endian 1.0\n"
         << "element vertex " << count << '\n'
         << "property float x\n"
         << "property float y\n"
         << "property float z\n"
         << "property uchar red\n"
         << "property uchar green\n"
         << "property uchar blue\n"
         << "property uchar label\n"
         << "end_header\n";
  std::string bytes = header.str();
  const std::size_t body_start = bytes.size();
  bytes.resize(body_start + count * 16);
  char* out = bytes.data() + body_start;
  for (const LabeledPoint& p : cloud) {
    if (!passes(p, filter)) continue;
    const float xyz[3] = {static_cast<float>(p.position.x()), static_cast<float>(p.position.y()),
                          static_cast<float>(p.position.z())};
    std::memcpy(out, xyz, 12);
    out[12] = static_cast<char>(p.rgb[0]);
    out[13] = static_cast<char>(p.rgb[1]);
    out[14] = static_cast<char>(p.rgb[2]);
    out[15] = static_cast<char>(p.label);
    out += 16;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw IoError("write failed: " + path.string());
}

namespace {

struct PlyProperty {
  std::string name;
  std::string type;
  std::size_t size = 0;
};

std::size_t plyTypeSize(const std::string& type) {
  static const std::map<std::string, std::size_t> sizes = {
      {"char", 1},  {"uchar", 1},  {"int8", 1},  {"uint8", 1},   {"short", 2},   {"ushort", 2},
      {"int16", 2}, {"uint16", 2}, {"int", 4},   {"uint", 4},    {"int32", 4},   {"uint32", 4},
      {"float", 4}, {"float32", 4}, {"double", 8}, {"float64", 8}};
  const auto it = sizes.find(type);
  return it == sizes.end() ? 0 : it->second;
}

double decodeBinary(const char* p, const std::string& type) {
  auto load = [p](auto v) {
    std::memcpy(&v, p, sizeof(v));
    return static_cast<double>(v);
  };
  if (type == "char" || type == "int8") return load(std::int8_t{});
  if (type == "uchar" || type == "uint8") return load(std::uint8_t{});
  if (type == "short" || type == "int16") return load(std::int16_t{});
  if (type == "ushort" || type == "uint16") return load(std::uint16_t{});
  if (type == "int" || type == "int32") return load(std::int32_t{});
  if (type == "uint" || type == "uint32") return load(std::uint32_t{});
  if (type == "float" || type == "float32") return load(float{});
  return load(double{});
}

}  // namespace

PointCloud readPly(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string name = path.filename().string();
  auto fail = [&name](const std::string& msg) -> FormatError { return FormatError(name + ": " + msg); };

  std::string line;
  if (!std::getline(in, line) || line != "ply") throw fail("missing 'ply' magic");
  std::string format;
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool seen_vertex = false;
  std::vector<PlyProperty> props;
  while (true) {
    if (!std::getline(in, line)) throw fail("unterminated header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end_header") break;
    if (key == "comment" || key == "obj_info" || key.empty()) continue;
    if (key == "format") {
      ls >> format;
      if (format != "binary_little_endian" && format != "ascii") throw fail("unsupported format " + format);
    } else if (key == "element") {
      std::string element;
      ls >> element;
      if (element == "vertex") {
        if (seen_vertex) throw fail("duplicate vertex element");
        if (!(ls >> vertex_count)) throw fail("bad vertex count");
        in_vertex = seen_vertex = true;
      } else {
        if (!seen_vertex) throw fail("vertex must be the first element");
        in_vertex = false;
      }
    } else if (key == "property") {
      if (!in_vertex) continue;
      PlyProperty prop;
      ls >> prop.type;
      if (prop.type == "list") throw fail("list properties in vertex element are not supported");
      ls >> prop.name;
      prop.size = plyTypeSize(prop.type);
      if (prop.size == 0) throw fail("unknown property type " + prop.type);
      props.push_back(prop);
    } else {
      throw fail("unexpected header line '" + line + "'");
    }
  }
  if (format.empty()) throw fail("missing format line");

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, il = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    const std::string& n = props[i].name;
    const int idx = static_cast<int>(i);
    if (n == "x") ix = idx;
    else if (n == "y") iy = idx;
    else if (n == "z") iz = idx;
    else if (n == "red") ir = idx;
    else if (n == "green") ig = idx;
    else if (n == "blue") ib = idx;
    else if (n == "label") il = idx;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw fail("vertex element lacks x/y/z");

  std::vector<double> values(props.size());
  PointCloud cloud;
  cloud.reserve(vertex_count);
  std::size_t stride = 0;
  for (const PlyProperty& p : props) stride += p.size;
  std::vector<char> record(stride);
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (format == "ascii") {
      for (double& value : values) {
        if (!(in >> value)) throw fail("truncated vertex data");
      }
    } else {
      if (!in.read(record.data(), static_cast<std::streamsize>(stride))) throw fail("truncated vertex data");
      std::size_t off = 0;
      for (std::size_t i = 0; i < props.size(); ++i) {
        values[i] = decodeBinary(record.data() + off, props[i].type);
        off += props[i].size;
      }
    }
    LabeledPoint p;
    p.position = Vec3(values[ix], values[iy], values[iz]);
    if (ir >= 0 && ig >= 0 && ib >= 0) {
      p.rgb = {static_cast<std::uint8_t>(values[ir]), static_cast<std::uint8_t>(values[ig]),
               static_cast<std::uint8_t>(values[ib])};
    }
    if (il >= 0) p.label = static_cast<ClassId>(values[il]);
    cloud.push_back(p);
  }
  return cloud;
}

}  // namespace semap
