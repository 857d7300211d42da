#include "doctest.h"
#include "oracles.hpp"

#include "tavr/voxel.hpp"

using namespace tavr;

TEST_CASE("grid indexing is x-fastest and round-trips") {
  VoxelGrid3 g(Dims{3, 4, 5});
  CHECK(g.size() == 60);
  CHECK(g.linear(1, 0, 0) == 1);
  CHECK(g.linear(0, 1, 0) == 3);
  CHECK(g.linear(0, 0, 1) == 12);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Index3 p = g.index(i);
    CHECK(g.linear(p.x, p.y, p.z) == i);
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(VoxelGrid3(Dims{0, 1, 1}), Error);
  CHECK_THROWS_AS(VoxelGrid3(Dims{1, 1, 1}, Vec3(1, 0, 1)), Error);
  Affine singular = Affine::Identity();
  singular(2, 2) = 0;
  CHECK_THROWS_AS(VoxelGrid3(Dims{2, 2, 2}, Vec3::Ones(), singular), Error);
}

TEST_CASE("world mapping and grid comparison") {
  VoxelGrid3 g(Dims{4, 4, 4}, Vec3(0.5, 1.0, 2.0));
  CHECK(g.to_world(Vec3(2, 2, 2)).isApprox(Vec3(1, 2, 4)));
  CHECK(g.diagonal() == doctest::Approx(std::sqrt(48.0)));  // extent of 4 voxels per axis
  CHECK(g.same_as(VoxelGrid3(Dims{4, 4, 4}, Vec3(0.5, 1.0, 2.0))));
  CHECK_FALSE(g.same_as(VoxelGrid3(Dims{4, 4, 4})));
  CHECK_FALSE(g.same_as(VoxelGrid3(Dims{4, 4, 5}, Vec3(0.5, 1.0, 2.0))));
  CHECK_THROWS_AS(require_same_grid(g, VoxelGrid3(Dims{4, 4, 4}), "test"), GridMismatch);
}

TEST_CASE("class map") {
  const ClassMap& m = ClassMap::tavr();
  CHECK(m.entries().size() == 8);
  CHECK(m.id_of("aorta") == cls::aorta);
  CHECK(m.id_of("left_ventricle") == cls::left_ventricle);
  CHECK(m.id_of("aortic_root") == cls::aortic_root);
  CHECK(m.id_of("valve") == cls::valve);
  CHECK(m.id_of("annulus") == cls::annulus);
  CHECK(m.id_of("iliac_artery_left") == cls::iliac_artery_left);
  CHECK(m.id_of("iliac_artery_right") == cls::iliac_artery_right);
  CHECK(m.name_of(0) == "background");
  CHECK(m.foreground().size() == 7);
  CHECK(m.max_id() == 7);
  CHECK_FALSE(m.find("heart"));
  CHECK_THROWS_AS(m.id_of("heart"), Error);
  CHECK_THROWS_AS(m.name_of(9), Error);

  CHECK_THROWS_AS(ClassMap({{0, "background"}, {1, "a"}, {1, "b"}}), Error);
  CHECK_THROWS_AS(ClassMap({{0, "background"}, {1, "a"}, {2, "a"}}), Error);
  CHECK_THROWS_AS(ClassMap({{0, "nothing"}, {1, "a"}}), Error);
}

TEST_CASE("class_mask examples") {
  VoxelGrid3 g(Dims{5, 5, 5});
  LabelVolume vol(g, ClassMap::tavr());
  CHECK(class_mask(vol, cls::aorta).empty());
  vol.set(2, 3, 4, cls::aorta);
  const BinaryMask m = class_mask(vol, cls::aorta);
  CHECK(m.count() == 1);
  CHECK(m.at(2, 3, 4));
  CHECK_THROWS_AS(class_mask(vol, 12), Error);
}

TEST_CASE("class_mask equals elementwise scan and partitions the grid") {
  std::mt19937_64 rng(7);
  VoxelGrid3 g(Dims{8, 8, 8});
  const LabelVolume vol = oracle::random_labels(g, 3, rng);
  BinaryMask all(g);
  for (const auto& e : vol.classes().entries()) {
    const BinaryMask m = class_mask(vol, e.id);
    for (std::size_t i = 0; i < vol.size(); ++i) CHECK(m[i] == (vol[i] == e.id));
    CHECK((all & m).empty());
    all = all | m;
  }
  CHECK(all.count() == g.size());
}

TEST_CASE("label volume rejects unregistered ids") {
  VoxelGrid3 g(Dims{2, 2, 2});
  LabelVolume vol(g, ClassMap::tavr());
  CHECK_THROWS_AS(vol.set(0, ClassId{8}), Error);
  CHECK_THROWS_AS(LabelVolume(g, ClassMap::tavr(), std::vector<ClassId>(8, 9)), Error);
  CHECK_THROWS_AS(LabelVolume(g, ClassMap::tavr(), std::vector<ClassId>(7, 0)), Error);
}

TEST_CASE("mask set algebra") {
  std::mt19937_64 rng(3);
  VoxelGrid3 g(Dims{6, 5, 4});
  const BinaryMask a = oracle::random_mask(g, 0.4, rng), b = oracle::random_mask(g, 0.4, rng);
  CHECK((a & b).is_subset_of(a));
  CHECK(a.is_subset_of(a | b));
  CHECK(((a - b) & b).empty());
  CHECK(((a - b) | (a & b)) == a);
  CHECK((a & b).count() + (a | b).count() == a.count() + b.count());
}
