#include "tavr/components.hpp"

#include <cstdlib>

namespace tavr {

namespace {

struct Offset {
  int dx, dy, dz;
};

std::vector<Offset> neighbor_offsets(Connectivity connectivity) {
  std::vector<Offset> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (manhattan == 0) continue;
        if (connectivity == Connectivity::face6 && manhattan != 1) continue;
        out.push_back({dx, dy, dz});
      }
  return out;
}

}  // namespace

Components connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const VoxelGrid3& grid = mask.grid();
  const Dims d = grid.dims();
  const auto offsets = neighbor_offsets(connectivity);

  Components result;
  result.labels.assign(mask.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (!mask[seed] || result.labels[seed] != 0) continue;
    const std::uint32_t id = ++result.count;
    result.labels[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const Index3 p = grid.index(cur);
      for (const Offset& o : offsets) {
        const std::int64_t x = p.x + o.dx, y = p.y + o.dy, z = p.z + o.dz;
        if (!d.contains(x, y, z)) continue;
        const std::size_t n = grid.linear(x, y, z);
        if (mask[n] && result.labels[n] == 0) {
          result.labels[n] = id;
          stack.push_back(n);
        }
      }
    }
  }
  return result;
}

}  // namespace tavr
