#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tavr/error.hpp"

namespace tavr {

using ClassId = std::uint8_t;
using Vec3 = Eigen::Vector3d;
using Affine = Eigen::Matrix4d;

struct Index3 {
  std::int64_t x = 0, y = 0, z = 0;
  bool operator==(const Index3&) const = default;
};

struct Dims {
  std::int64_t nx = 0, ny = 0, nz = 0;

  std::size_t count() const { return static_cast<std::size_t>(nx * ny * nz); }
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
  }
  bool operator==(const Dims&) const = default;
};

// Dimensions, spacing (mm/voxel) and the voxel-index -> world-mm affine.
// Linear voxel order is x-fastest everywhere in the library.
class VoxelGrid3 {
 public:
  VoxelGrid3() = default;
  // Affine defaults to diag(spacing) with zero origin.
  VoxelGrid3(Dims dims, Vec3 spacing = Vec3::Ones());
  VoxelGrid3(Dims dims, Vec3 spacing, const Affine& affine);

  const Dims& dims() const { return dims_; }
  const Vec3& spacing() const { return spacing_; }
  const Affine& affine() const { return affine_; }
  std::size_t size() const { return dims_.count(); }

  std::size_t linear(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return static_cast<std::size_t>(x + dims_.nx * (y + dims_.ny * z));
  }
  Index3 index(std::size_t i) const {
    const auto li = static_cast<std::int64_t>(i);
    return {li % dims_.nx, (li / dims_.nx) % dims_.ny, li / (dims_.nx * dims_.ny)};
  }
  Vec3 to_world(const Vec3& ijk) const;

  // Length of the grid diagonal in index units.
  double diagonal() const;

  // Same dims and affine (affine compared with a relative tolerance).
  bool same_as(const VoxelGrid3& other) const;

 private:
  Dims dims_{};
  Vec3 spacing_ = Vec3::Ones();
  Affine affine_ = Affine::Identity();
};

void require_same_grid(const VoxelGrid3& a, const VoxelGrid3& b, const char* what);

class ClassMap {
 public:
  struct Entry {
    ClassId id;
    std::string name;
  };

  // Background only.
  ClassMap();
  explicit ClassMap(std::vector<Entry> entries);

  // 0 background, 1 aorta, 2 left_ventricle, 3 aortic_root, 4 valve, 5 annulus,
  // 6 iliac_artery_left, 7 iliac_artery_right.
  static const ClassMap& tavr();

  const std::vector<Entry>& entries() const { return entries_; }
  bool contains(ClassId id) const;
  std::optional<ClassId> find(std::string_view name) const;
  ClassId id_of(std::string_view name) const;  // throws if unknown
  const std::string& name_of(ClassId id) const;
  std::vector<ClassId> foreground() const;
  ClassId max_id() const;

  bool operator==(const ClassMap& other) const;

 private:
  std::vector<Entry> entries_;
};

namespace cls {
inline constexpr ClassId background = 0;
inline constexpr ClassId aorta = 1;
inline constexpr ClassId left_ventricle = 2;
inline constexpr ClassId aortic_root = 3;
inline constexpr ClassId valve = 4;
inline constexpr ClassId annulus = 5;
inline constexpr ClassId iliac_artery_left = 6;
inline constexpr ClassId iliac_artery_right = 7;
}  // namespace cls

class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(VoxelGrid3 grid);

  const VoxelGrid3& grid() const { return grid_; }
  std::size_t size() const { return bits_.size(); }

  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  bool at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return bits_[grid_.linear(x, y, z)] != 0;
  }
  void set(std::size_t i, bool v = true) { bits_[i] = v ? 1 : 0; }
  void set(std::int64_t x, std::int64_t y, std::int64_t z, bool v = true) {
    set(grid_.linear(x, y, z), v);
  }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<std::size_t> indices() const;

  bool is_subset_of(const BinaryMask& other) const;
  BinaryMask operator&(const BinaryMask& o) const;
  BinaryMask operator|(const BinaryMask& o) const;
  BinaryMask operator-(const BinaryMask& o) const;  // set difference
  bool operator==(const BinaryMask& o) const;

 private:
  VoxelGrid3 grid_;
  std::vector<std::uint8_t> bits_;
};

class LabelVolume {
 public:
  LabelVolume() = default;
  LabelVolume(VoxelGrid3 grid, ClassMap classes);  // all background
  LabelVolume(VoxelGrid3 grid, ClassMap classes, std::vector<ClassId> voxels);

  const VoxelGrid3& grid() const { return grid_; }
  const ClassMap& classes() const { return classes_; }
  std::size_t size() const { return voxels_.size(); }

  ClassId operator[](std::size_t i) const { return voxels_[i]; }
  ClassId at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return voxels_[grid_.linear(x, y, z)];
  }
  // Throws if id is not registered.
  void set(std::size_t i, ClassId id);
  void set(std::int64_t x, std::int64_t y, std::int64_t z, ClassId id) {
    set(grid_.linear(x, y, z), id);
  }
  // Writes `id` wherever the mask is set.
  void paint(const BinaryMask& mask, ClassId id);

  std::span<const ClassId> voxels() const { return voxels_; }
  std::size_t count(ClassId id) const;
  bool operator==(const LabelVolume& o) const;

 private:
  VoxelGrid3 grid_;
  ClassMap classes_;
  std::vector<ClassId> voxels_;
};

BinaryMask class_mask(const LabelVolume& vol, ClassId c);

}  // namespace tavr
