#include "tavr/skeleton.hpp"

#include <array>

#include "tavr/distance.hpp"
#include "tavr/topology.hpp"

namespace tavr {

namespace {

struct Direction {
  int dx, dy, dz;
};

constexpr std::array<Direction, 6> kSweepOrder{{
    {0, 0, 1}, {0, 0, -1}, {0, 1, 0}, {0, -1, 0}, {1, 0, 0}, {-1, 0, 0}}};

bool deletable(const BinaryMask& m, const Index3& p) {
  const auto n = topology::neighborhood(m, p.x, p.y, p.z);
  return topology::object_neighbors(n) > 1 && topology::is_simple(n);
}

}  // namespace

BinaryMask skeletonize(const BinaryMask& mask) {
  BinaryMask work = mask;
  const VoxelGrid3& grid = mask.grid();
  const Dims& d = grid.dims();
  std::vector<std::size_t> object = mask.indices();
  std::vector<std::size_t> candidates;

  bool changed = true;
  while (changed) {
    changed = false;
    for (const Direction& dir : kSweepOrder) {
      candidates.clear();
      for (std::size_t i : object) {
        if (!work[i]) continue;
        const Index3 p = grid.index(i);
        const std::int64_t x = p.x + dir.dx, y = p.y + dir.dy, z = p.z + dir.dz;
        const bool border = !d.contains(x, y, z) || !work.at(x, y, z);
        if (border && deletable(work, p)) candidates.push_back(i);
      }
      for (std::size_t i : candidates) {
        if (deletable(work, grid.index(i))) {
          work.set(i, false);
          changed = true;
        }
      }
    }
    std::erase_if(object, [&](std::size_t i) { return !work[i]; });
  }
  return work;
}

BinaryMask tubed_skeleton(const BinaryMask& mask, double tube_radius) {
  if (!(tube_radius >= 0.0)) throw Error("tube radius must be non-negative");
  return dilate(skeletonize(mask), tube_radius, Metric::index_euclidean);
}

SkeletonMask skeletons_for_volume(const LabelVolume& vol, double tube_radius) {
  SkeletonMask out{vol.grid(), tube_radius, {}};
  for (ClassId c : vol.classes().foreground()) {
    BinaryMask m = class_mask(vol, c);
    if (m.empty()) continue;
    out.per_class.emplace(c, tubed_skeleton(m, tube_radius));
  }
  return out;
}

}  // namespace tavr
