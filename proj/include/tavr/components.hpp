#pragma once

#include <cstdint>
#include <vector>

#include "tavr/voxel.hpp"

namespace tavr {

enum class Connectivity { face6 = 6, full26 = 26 };

struct Components {
  // 0 for background, 1..count for foreground; ids follow the x-fastest scan
  // order of each component's first voxel.
  std::vector<std::uint32_t> labels;
  std::uint32_t count = 0;
};

Components connected_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::full26);

inline std::uint32_t count_components(const BinaryMask& mask,
                                      Connectivity connectivity = Connectivity::full26) {
  return connected_components(mask, connectivity).count;
}

}  // namespace tavr
