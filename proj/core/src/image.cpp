#include "semap/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>

#include <png.h>

#include "semap/errors.hpp"

namespace semap {

const char* toString(Side side) { return side == Side::kLeft ? "left" : "right"; }

LabelMap::LabelMap(int width, int height, ClassId fill)
    : width_(width), height_(height), ids_(static_cast<std::size_t>(width) * height, fill) {
  if (width < 0 || height < 0) throw std::invalid_argument("LabelMap: negative size");
}

ClassId sampleLabel(const LabelMap& map, const Pixel& pixel) {
  const double ur = std::round(pixel.u);
  const double vr = std::round(pixel.v);
  if (!(ur >= 0.0 && vr >= 0.0 && ur < map.width() && vr < map.height())) {
    throw std::domain_error("sampleLabel: pixel (" + std::to_string(pixel.u) + ", " + std::to_string(pixel.v) +
                            ") outside " + std::to_string(map.width()) + "x" + std::to_string(map.height()) + " map");
  }
  return map.at(static_cast<int>(ur), static_cast<int>(vr));
}

GrayImage::GrayImage(int width, int height, float fill)
    : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
  if (width < 0 || height < 0) throw std::invalid_argument("GrayImage: negative size");
}

bool GrayImage::interpolatable(double x, double y) const {
  return x >= 1.0 && y >= 1.0 && x <= width_ - 2 && y <= height_ - 2;
}

double GrayImage::bilinear(double x, double y) const {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double ax = x - x0;
  const double ay = y - y0;
  const double i00 = at(x0, y0);
  const double i10 = at(x0 + 1, y0);
  const double i01 = at(x0, y0 + 1);
  const double i11 = at(x0 + 1, y0 + 1);
  return (1.0 - ay) * ((1.0 - ax) * i00 + ax * i10) + ay * ((1.0 - ax) * i01 + ax * i11);
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct RawGray {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> values;
};

[[noreturn]] void pngError(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void pngWarning(png_structp, png_const_charp) {}

RawGray readRawGray(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());

  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError(path.string() + ": not a PNG file");
  }

  std::string what;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &what, pngError, pngWarning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng initialisation failed");
  }

  RawGray raw;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": " + what);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  if (color_type != PNG_COLOR_TYPE_GRAY || (raw.bit_depth != 8 && raw.bit_depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": expected 8- or 16-bit single-channel gray PNG");
  }
  if (raw.bit_depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  raw.values.resize(static_cast<std::size_t>(raw.width) * raw.height);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      std::uint16_t value;
      if (raw.bit_depth == 8) {
        value = rows[y][x];
      } else {
        value = static_cast<std::uint16_t>(rows[y][2 * x] | (rows[y][2 * x + 1] << 8));
      }
      raw.values[static_cast<std::size_t>(y) * raw.width + x] = value;
    }
  }
  return raw;
}

void writeGray8(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& pixels) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path.string());

  std::string what;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &what, pngError, pngWarning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialisation failed");
  }
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * width);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string() + ": " + what);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

LabelMap readLabelPng(const std::filesystem::path& path) {
  RawGray raw = readRawGray(path);
  if (raw.bit_depth != 8) throw FormatError(path.string() + ": label maps must be 8-bit");
  LabelMap map(raw.width, raw.height);
  std::transform(raw.values.begin(), raw.values.end(), map.data().begin(),
                 [](std::uint16_t v) { return static_cast<ClassId>(v); });
  return map;
}

void writeLabelPng(const std::filesystem::path& path, const LabelMap& map) {
  writeGray8(path, map.width(), map.height(), map.data());
}

GrayImage readGrayPng(const std::filesystem::path& path) {
  RawGray raw = readRawGray(path);
  GrayImage image(raw.width, raw.height);
  const float scale = raw.bit_depth == 16 ? 255.0f / 65535.0f : 1.0f;
  std::transform(raw.values.begin(), raw.values.end(), image.data().begin(),
                 [scale](std::uint16_t v) { return static_cast<float>(v) * scale; });
  return image;
}

void writeGrayPng(const std::filesystem::path& path, const GrayImage& image) {
  std::vector<std::uint8_t> pixels(image.data().size());
  std::transform(image.data().begin(), image.data().end(), pixels.begin(), [](float v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  });
  writeGray8(path, image.width(), image.height(), pixels);
}

}  // namespace semap
