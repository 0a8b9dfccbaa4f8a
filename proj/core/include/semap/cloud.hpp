#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <vector>

#include "semap/dataset.hpp"
#include "semap/geometry.hpp"
#include "semap/tcl.hpp"

namespace semap {

// Stored label of points without a class. Shares the void id.
inline constexpr ClassId kUnlabeledMarker = kVoidClass;
inline constexpr std::array<std::uint8_t, 3> kUnlabeledColor{128, 128, 128};

struct LabeledPoint {
  Vec3 position = Vec3::Zero();  // global frame, meters
  ClassId label = kUnlabeledMarker;
  std::array<std::uint8_t, 3> rgb = kUnlabeledColor;
  int source_kf = -1;
};

using PointCloud = std::vector<LabeledPoint>;

// Every point unprojected in its host frame and moved to world coordinates,
// in keyframe / point order. Throws std::invalid_argument when `labels` does
// not cover the dataset.
PointCloud buildCloud(const SequenceDataset& ds, const LabelAssignment& labels);

// Rigidly moves each cloud by its transform and concatenates in argument
// order. No deduplication.
PointCloud mergeClouds(const std::vector<PointCloud>& clouds, const std::vector<Pose>& transforms);

// Binary little-endian PLY: float x y z, uchar red green blue label.
// With a filter only listed classes are written and unlabeled points are dropped.
void writePly(const std::filesystem::path& path, const PointCloud& cloud,
              const std::optional<std::set<ClassId>>& filter = std::nullopt);

// Reads a vertex-only PLY (binary little-endian or ascii). x/y/z are
// required; colour and label default to the unlabeled marker.
PointCloud readPly(const std::filesystem::path& path);

std::size_t countPassing(const PointCloud& cloud, const std::optional<std::set<ClassId>>& filter);

}  // namespace semap
