#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "tavr/losses.hpp"
#include "tavr/voxel.hpp"

namespace tavr::io {

namespace nifti_type {
inline constexpr std::int16_t uint8 = 2;
inline constexpr std::int16_t int16 = 4;
inline constexpr std::int16_t int32 = 8;
inline constexpr std::int16_t float32 = 16;
inline constexpr std::int16_t float64 = 64;
inline constexpr std::int16_t int8 = 256;
inline constexpr std::int16_t uint16 = 512;
inline constexpr std::int16_t uint32 = 768;
}  // namespace nifti_type

// Single-file NIfTI-1 (.nii or .nii.gz), little-endian. Up to four dimensions;
// the fourth is the channel axis.
struct NiftiImage {
  VoxelGrid3 grid;
  int channels = 1;
  std::int16_t datatype = nifti_type::uint8;
  std::vector<double> data;  // scaled by scl_slope/scl_inter when present
};

NiftiImage read_nifti(const std::filesystem::path& path);

// Writes via a temporary file and rename. A ".gz" suffix selects gzip.
void write_nifti(const std::filesystem::path& path, const VoxelGrid3& grid, int channels,
                 std::span<const double> data, std::int16_t datatype);

// Source label value -> class id. Values absent from the mapping become
// background.
using LabelMapping = std::map<int, ClassId>;

// Reads an integer label volume. Without a mapping every value must already be
// a registered class id.
LabelVolume read_labels(const std::filesystem::path& path, const ClassMap& classes = ClassMap::tavr(),
                        const LabelMapping* mapping = nullptr);
void write_labels(const std::filesystem::path& path, const LabelVolume& vol);

LogitField read_logits(const std::filesystem::path& path);
void write_logits(const std::filesystem::path& path, const ChannelField& field);

// Writes `bytes` to `path` through a sibling temporary file and rename.
void atomic_write(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void atomic_write(const std::filesystem::path& path, const std::string& text);

}  // namespace tavr::io
