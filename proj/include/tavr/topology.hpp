#pragma once

#include <cstdint>

#include "tavr/voxel.hpp"

namespace tavr::topology {

// 3x3x3 neighbourhood packed into 27 bits, bit (dz+1)*9 + (dy+1)*3 + (dx+1).
// Out-of-grid neighbours read as background.
using Neighborhood = std::uint32_t;
inline constexpr int kCenter = 13;

Neighborhood neighborhood(const BinaryMask& mask, std::int64_t x, std::int64_t y, std::int64_t z);

// Simple point under (26, 6) adjacency: flipping the centre voxel changes
// neither the number of 26-components of the object nor of 6-components of
// the background (no cavities or tunnels are created or destroyed).
bool is_simple(Neighborhood n);

int object_neighbors(Neighborhood n);

}  // namespace tavr::topology
