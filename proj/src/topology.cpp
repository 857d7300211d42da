#include "tavr/topology.hpp"

#include <array>
#include <bit>
#include <cstdlib>

namespace tavr::topology {

namespace {

struct Tables {
  std::array<std::uint32_t, 27> adj26{};  // 26-adjacent positions inside the cube, centre excluded
  std::array<std::uint32_t, 27> adj6{};   // 6-adjacent positions inside N18, centre excluded
  std::uint32_t n26 = 0;                  // all positions except centre
  std::uint32_t n18 = 0;                  // manhattan distance 1 or 2 from centre
  std::uint32_t n6 = 0;                   // manhattan distance 1
};

int bit(int dx, int dy, int dz) { return (dz + 1) * 9 + (dy + 1) * 3 + (dx + 1); }

Tables build_tables() {
  Tables t;
  const auto manhattan = [](int dx, int dy, int dz) { return std::abs(dx) + std::abs(dy) + std::abs(dz); };
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int b = bit(dx, dy, dz);
        const int m = manhattan(dx, dy, dz);
        if (m == 0) continue;
        t.n26 |= 1u << b;
        if (m <= 2) t.n18 |= 1u << b;
        if (m == 1) t.n6 |= 1u << b;
      }
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int b = bit(dx, dy, dz);
        for (int ez = -1; ez <= 1; ++ez)
          for (int ey = -1; ey <= 1; ++ey)
            for (int ex = -1; ex <= 1; ++ex) {
              const int m = manhattan(ex, ey, ez);
              if (m == 0) continue;
              const int x = dx + ex, y = dy + ey, z = dz + ez;
              if (std::abs(x) > 1 || std::abs(y) > 1 || std::abs(z) > 1) continue;
              const int nb = bit(x, y, z);
              if (nb == kCenter) continue;
              t.adj26[b] |= 1u << nb;
              if (m == 1) t.adj6[b] |= 1u << nb;
            }
      }
  for (int b = 0; b < 27; ++b) t.adj6[b] &= t.n18;
  return t;
}

const Tables& tables() {
  static const Tables t = build_tables();
  return t;
}

// Flood fill of `seed` within `set` using the given adjacency table.
std::uint32_t flood(std::uint32_t seed, std::uint32_t set, const std::array<std::uint32_t, 27>& adj) {
  std::uint32_t comp = seed, frontier = seed;
  while (frontier) {
    std::uint32_t grown = 0;
    for (std::uint32_t f = frontier; f; f &= f - 1) grown |= adj[std::countr_zero(f)];
    grown &= set & ~comp;
    comp |= grown;
    frontier = grown;
  }
  return comp;
}

}  // namespace

Neighborhood neighborhood(const BinaryMask& mask, std::int64_t x, std::int64_t y, std::int64_t z) {
  const Dims& d = mask.grid().dims();
  Neighborhood n = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const std::int64_t xx = x + dx, yy = y + dy, zz = z + dz;
        if (d.contains(xx, yy, zz) && mask.at(xx, yy, zz)) n |= 1u << bit(dx, dy, dz);
      }
  return n;
}

int object_neighbors(Neighborhood n) { return std::popcount(n & tables().n26); }

bool is_simple(Neighborhood n) {
  const Tables& t = tables();

  const std::uint32_t object = n & t.n26;
  if (object == 0) return false;  // isolated voxel
  const std::uint32_t first = object & (~object + 1);
  if (flood(first, object, t.adj26) != object) return false;

  const std::uint32_t background = ~n & t.n18;
  std::uint32_t faces = background & t.n6;
  if (faces == 0) return false;  // interior voxel
  const std::uint32_t comp = flood(faces & (~faces + 1), background, t.adj6);
  return (faces & ~comp) == 0;
}

}  // namespace tavr::topology
