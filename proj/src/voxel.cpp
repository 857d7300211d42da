#include "tavr/voxel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <set>

namespace tavr {

namespace {

Affine diagonal_affine(const Vec3& spacing) {
  Affine a = Affine::Identity();
  a(0, 0) = spacing.x();
  a(1, 1) = spacing.y();
  a(2, 2) = spacing.z();
  return a;
}

}  // namespace

VoxelGrid3::VoxelGrid3(Dims dims, Vec3 spacing)
    : VoxelGrid3(dims, spacing, diagonal_affine(spacing)) {}

VoxelGrid3::VoxelGrid3(Dims dims, Vec3 spacing, const Affine& affine)
    : dims_(dims), spacing_(spacing), affine_(affine) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
    throw Error("grid dimensions must be positive");
  if (!(spacing.x() > 0 && spacing.y() > 0 && spacing.z() > 0))
    throw Error("grid spacing must be strictly positive");
  if (!affine.allFinite() || std::abs(affine.topLeftCorner<3, 3>().determinant()) < 1e-12)
    throw Error("grid affine is not invertible");
}

Vec3 VoxelGrid3::to_world(const Vec3& ijk) const {
  return affine_.topLeftCorner<3, 3>() * ijk + affine_.topRightCorner<3, 1>();
}

double VoxelGrid3::diagonal() const {
  const auto sq = [](std::int64_t v) { return static_cast<double>(v) * static_cast<double>(v); };
  return std::sqrt(sq(dims_.nx) + sq(dims_.ny) + sq(dims_.nz));
}

bool VoxelGrid3::same_as(const VoxelGrid3& other) const {
  if (!(dims_ == other.dims_)) return false;
  const double scale = std::max(1.0, affine_.cwiseAbs().maxCoeff());
  return (affine_ - other.affine_).cwiseAbs().maxCoeff() <= 1e-6 * scale;
}

void require_same_grid(const VoxelGrid3& a, const VoxelGrid3& b, const char* what) {
  if (!a.same_as(b)) throw GridMismatch(std::string("grid mismatch: ") + what);
}

// ---------------------------------------------------------------------------

ClassMap::ClassMap() : entries_{{0, "background"}} {}

ClassMap::ClassMap(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::set<ClassId> ids;
  std::set<std::string> names;
  bool has_background = false;
  for (const auto& e : entries_) {
    if (!ids.insert(e.id).second)
      throw Error("duplicate class id " + std::to_string(e.id));
    if (!names.insert(e.name).second) throw Error("duplicate class name '" + e.name + "'");
    if (e.id == 0) {
      if (e.name != "background") throw Error("class id 0 must be named 'background'");
      has_background = true;
    }
  }
  if (!has_background) entries_.insert(entries_.begin(), Entry{0, "background"});
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
}

const ClassMap& ClassMap::tavr() {
  static const ClassMap map({{0, "background"},
                             {1, "aorta"},
                             {2, "left_ventricle"},
                             {3, "aortic_root"},
                             {4, "valve"},
                             {5, "annulus"},
                             {6, "iliac_artery_left"},
                             {7, "iliac_artery_right"}});
  return map;
}

bool ClassMap::contains(ClassId id) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.id == id; });
}

std::optional<ClassId> ClassMap::find(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.id;
  return std::nullopt;
}

ClassId ClassMap::id_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw Error("unknown class name '" + std::string(name) + "'");
}

const std::string& ClassMap::name_of(ClassId id) const {
  for (const auto& e : entries_)
    if (e.id == id) return e.name;
  throw Error("unknown class id " + std::to_string(id));
}

std::vector<ClassId> ClassMap::foreground() const {
  std::vector<ClassId> out;
  for (const auto& e : entries_)
    if (e.id != 0) out.push_back(e.id);
  return out;
}

ClassId ClassMap::max_id() const { return entries_.back().id; }

bool ClassMap::operator==(const ClassMap& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].id != other.entries_[i].id || entries_[i].name != other.entries_[i].name)
      return false;
  return true;
}

// ---------------------------------------------------------------------------

BinaryMask::BinaryMask(VoxelGrid3 grid) : grid_(std::move(grid)), bits_(grid_.size(), 0) {}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> BinaryMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

bool BinaryMask::is_subset_of(const BinaryMask& other) const {
  require_same_grid(grid_, other.grid_, "mask subset test");
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] && !other.bits_[i]) return false;
  return true;
}

BinaryMask BinaryMask::operator&(const BinaryMask& o) const {
  require_same_grid(grid_, o.grid_, "mask intersection");
  BinaryMask out(grid_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & o.bits_[i];
  return out;
}

BinaryMask BinaryMask::operator|(const BinaryMask& o) const {
  require_same_grid(grid_, o.grid_, "mask union");
  BinaryMask out(grid_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] | o.bits_[i];
  return out;
}

BinaryMask BinaryMask::operator-(const BinaryMask& o) const {
  require_same_grid(grid_, o.grid_, "mask difference");
  BinaryMask out(grid_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & !o.bits_[i];
  return out;
}

bool BinaryMask::operator==(const BinaryMask& o) const {
  return grid_.same_as(o.grid_) && bits_ == o.bits_;
}

// ---------------------------------------------------------------------------

LabelVolume::LabelVolume(VoxelGrid3 grid, ClassMap classes)
    : grid_(std::move(grid)), classes_(std::move(classes)), voxels_(grid_.size(), 0) {}

LabelVolume::LabelVolume(VoxelGrid3 grid, ClassMap classes, std::vector<ClassId> voxels)
    : grid_(std::move(grid)), classes_(std::move(classes)), voxels_(std::move(voxels)) {
  if (voxels_.size() != grid_.size())
    throw Error("label buffer has " + std::to_string(voxels_.size()) + " voxels, grid needs " +
                std::to_string(grid_.size()));
  std::array<bool, 256> known{};
  for (const auto& e : classes_.entries()) known[e.id] = true;
  for (ClassId v : voxels_)
    if (!known[v]) throw Error("label value " + std::to_string(v) + " is not a registered class");
}

void LabelVolume::set(std::size_t i, ClassId id) {
  if (!classes_.contains(id)) throw Error("unknown class id " + std::to_string(id));
  voxels_[i] = id;
}

void LabelVolume::paint(const BinaryMask& mask, ClassId id) {
  require_same_grid(grid_, mask.grid(), "paint");
  if (!classes_.contains(id)) throw Error("unknown class id " + std::to_string(id));
  for (std::size_t i = 0; i < voxels_.size(); ++i)
    if (mask[i]) voxels_[i] = id;
}

std::size_t LabelVolume::count(ClassId id) const {
  return static_cast<std::size_t>(std::count(voxels_.begin(), voxels_.end(), id));
}

bool LabelVolume::operator==(const LabelVolume& o) const {
  return grid_.same_as(o.grid_) && classes_ == o.classes_ && voxels_ == o.voxels_;
}

BinaryMask class_mask(const LabelVolume& vol, ClassId c) {
  if (!vol.classes().contains(c)) throw Error("unknown class id " + std::to_string(c));
  BinaryMask out(vol.grid());
  const auto voxels = vol.voxels();
  for (std::size_t i = 0; i < voxels.size(); ++i)
    if (voxels[i] == c) out.set(i);
  return out;
}

}  // namespace tavr
