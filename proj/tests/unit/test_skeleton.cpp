#include "doctest.h"
#include "oracles.hpp"

#include "tavr/components.hpp"
#include "tavr/distance.hpp"
#include "tavr/phantom.hpp"
#include "tavr/skeleton.hpp"

using namespace tavr;

namespace {

BinaryMask cylinder(const VoxelGrid3& g, double r, std::int64_t z0, std::int64_t z1, double cx, double cy) {
  BinaryMask m(g);
  for (std::int64_t z = z0; z <= z1; ++z)
    for (std::int64_t y = 0; y < g.dims().ny; ++y)
      for (std::int64_t x = 0; x < g.dims().nx; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y, z);
  return m;
}

void check_skeleton_properties(const BinaryMask& m) {
  const BinaryMask s = skeletonize(m);
  CHECK(s.is_subset_of(m));
  CHECK(skeletonize(s) == s);
  CHECK(count_components(s) == count_components(m));
}

}  // namespace

TEST_CASE("empty mask and thin line are fixed") {
  VoxelGrid3 g(Dims{5, 5, 12});
  CHECK(skeletonize(BinaryMask(g)).empty());
  BinaryMask line(g);
  for (int z = 1; z < 11; ++z) line.set(2, 2, z);
  CHECK(skeletonize(line) == line);
}

TEST_CASE("cylinder thins to a curve near the axis") {
  VoxelGrid3 g(Dims{13, 13, 44});
  const BinaryMask m = cylinder(g, 4.0, 2, 41, 6, 6);
  const BinaryMask s = skeletonize(m);
  CHECK(count_components(s) == 1);
  CHECK(s.count() >= 20);
  for (std::size_t i : s.indices()) {
    const Index3 p = g.index(i);
    CHECK(std::hypot(double(p.x - 6), double(p.y - 6)) <= 1.0 + 1e-9);
  }
  // Curve: no voxel has more than two 26-neighbours in the skeleton except where
  // the thinning leaves small knots, which must stay rare.
  int branchy = 0;
  for (std::size_t i : s.indices()) {
    const Index3 p = g.index(i);
    int n = 0;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if ((dx || dy || dz) && g.dims().contains(p.x + dx, p.y + dy, p.z + dz) && s.at(p.x + dx, p.y + dy, p.z + dz)) ++n;
    if (n > 2) ++branchy;
  }
  CHECK(branchy <= 2);
  check_skeleton_properties(m);
}

TEST_CASE("random blobs keep subset, fixed point and component count") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    VoxelGrid3 g(oracle::random_dims(rng, 3, 10));
    const BinaryMask m = dilate(oracle::random_mask(g, 0.03, rng), 1.5);
    check_skeleton_properties(m);
  }
}

TEST_CASE("skeleton keeps a hollow box's cavity") {
  VoxelGrid3 g(Dims{9, 9, 9});
  BinaryMask m(g);
  for (int z = 1; z <= 7; ++z)
    for (int y = 1; y <= 7; ++y)
      for (int x = 1; x <= 7; ++x)
        if (x == 1 || x == 7 || y == 1 || y == 7 || z == 1 || z == 7) m.set(x, y, z);
  const auto background_components = [&](const BinaryMask& s) {
    BinaryMask b(g);
    for (std::size_t i = 0; i < g.size(); ++i) b.set(i, !s[i]);
    return count_components(b, Connectivity::face6);
  };
  const BinaryMask s = skeletonize(m);
  CHECK(background_components(s) == 2);
  CHECK(count_components(s) == 1);
}

TEST_CASE("tubed skeleton") {
  VoxelGrid3 g(Dims{7, 7, 14});
  BinaryMask line(g);
  for (int z = 2; z < 12; ++z) line.set(3, 3, z);
  CHECK(tubed_skeleton(line, 0.0) == skeletonize(line));
  const BinaryMask tube = tubed_skeleton(line, 1.0);
  BinaryMask all(g);
  for (std::size_t i = 0; i < g.size(); ++i) all.set(i);
  CHECK(tube == oracle::brute_within(all, line, 1.0));
  CHECK(tube.count() == 10 * 5 + 2);
  CHECK_THROWS_AS(tubed_skeleton(line, -1.0), Error);
}

TEST_CASE("y bifurcation skeleton and tube stay connected") {
  phantom::Spec spec;
  spec.kind = phantom::Kind::y_bifurcation;
  const auto r = phantom::generate(spec, VoxelGrid3(Dims{32, 16, 40}));
  const BinaryMask m = class_mask(r.volume, cls::aorta);
  check_skeleton_properties(m);
  const BinaryMask tube = tubed_skeleton(m, 1.0);
  CHECK(count_components(tube) == 1);
  CHECK(tube.is_subset_of(dilate(m, 1.0)));
}

TEST_CASE("skeletons for volume") {
  VoxelGrid3 g(Dims{6, 6, 6});
  CHECK(skeletons_for_volume(LabelVolume(g, ClassMap::tavr())).empty());

  phantom::Spec spec;
  spec.kind = phantom::Kind::seven_class_composite;
  const auto r = phantom::generate(spec, VoxelGrid3(Dims{48, 48, 64}));
  const SkeletonMask sk = skeletons_for_volume(r.volume, 0.0);
  CHECK(sk.per_class.size() == 7);
  for (const auto& [c, s] : sk.per_class) {
    const BinaryMask m = class_mask(r.volume, c);
    CHECK(s == skeletonize(m));
    CHECK(count_components(s) == count_components(m));
  }
}
