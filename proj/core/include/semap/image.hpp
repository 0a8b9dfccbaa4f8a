#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "semap/geometry.hpp"

namespace semap {

using ClassId = std::uint8_t;
inline constexpr ClassId kVoidClass = 255;

enum class Side { kLeft, kRight };

const char* toString(Side side);

// Dense row-major grid of class ids. 255 is void.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, ClassId fill = kVoidClass);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return ids_.empty(); }

  ClassId at(int x, int y) const { return ids_[static_cast<std::size_t>(y) * width_ + x]; }
  ClassId& at(int x, int y) { return ids_[static_cast<std::size_t>(y) * width_ + x]; }

  const std::vector<ClassId>& data() const { return ids_; }
  std::vector<ClassId>& data() { return ids_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<ClassId> ids_;
};

// Nearest-neighbour lookup at (round(u), round(v)).
// Throws std::domain_error when the rounded cell is outside the map.
ClassId sampleLabel(const LabelMap& map, const Pixel& pixel);

// Grayscale intensities kept as float so synthetic renders stay exact;
// on disk they are 8-bit.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  float at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  float& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  // Interior test for bilinear sampling: 1 <= x <= width-2, same for y.
  bool interpolatable(double x, double y) const;
  // Caller must check interpolatable() first.
  double bilinear(double x, double y) const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

// 8-bit single channel PNG I/O. Throws IoError / FormatError.
LabelMap readLabelPng(const std::filesystem::path& path);
void writeLabelPng(const std::filesystem::path& path, const LabelMap& map);
// Accepts 8- or 16-bit gray; 16-bit values are scaled to [0, 255].
GrayImage readGrayPng(const std::filesystem::path& path);
// Rounds and clamps to [0, 255].
void writeGrayPng(const std::filesystem::path& path, const GrayImage& image);

}  // namespace semap
