#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tavr/enrich.hpp"
#include "tavr/voxel.hpp"

namespace tavr::phantom {

enum class Kind { box_interface, cylinder_bulb, radius_profile, y_bifurcation, seven_class_composite };

std::string to_string(Kind k);
Kind kind_from_string(std::string_view name);

// Geometry is expressed in voxel-index coordinates. The tube axis runs along z
// through the grid's central column. For the "heart base" kinds
// (cylinder_bulb, radius_profile, seven_class_composite) the left ventricle is
// a box directly below `base_z`, the aorta starts at `base_z`, and both iliac
// arteries are thin tubes beside the aorta.
struct Spec {
  Kind kind = Kind::cylinder_bulb;
  std::uint64_t seed = 0;
  // Probability of toggling each eligible boundary voxel (simple points only).
  double jitter = 0.0;

  // box_interface
  std::int64_t margin = 1;  // background border around both boxes in x/y/z
  std::int64_t gap = 0;     // background layers between ventricle (below) and aorta (above)
  std::int64_t inset = 0;   // extra x/y inset of the aorta box relative to the ventricle box

  // heart base
  std::int64_t base_z = 24;
  std::int64_t top_z = -1;  // -1: nz - 3
  std::int64_t ventricle_depth = 8;
  double ventricle_half_width = -1.0;  // -1: max aorta radius + 2
  double iliac_radius = 1.5;

  // cylinder_bulb / seven_class_composite
  double tube_radius = 5.0;
  double bulb_radius = 12.0;
  double bulb_center_z = 40.0;

  // radius_profile: radius of layer base_z + k
  std::vector<double> profile;

  // y_bifurcation
  double branch_radius = 2.0;
  double branch_spread = 8.0;  // x offset of each branch end from the axis
  ClassId label = cls::aorta;
};

struct GroundTruth {
  std::optional<PlaneFrame> annulus_plane;
  // Rule oracle evaluated by enumerating ball offsets (no distance transform).
  std::optional<BinaryMask> expected_valve;
  std::optional<BinaryMask> expected_annulus;
  // Distances from the annulus plane.
  std::optional<double> bulb_equator_distance;
  std::optional<double> waist_distance;  // bulb_center + sqrt(R^2 - r^2)
  std::optional<double> profile_max_distance;
  std::optional<double> profile_min_distance;
  std::map<ClassId, std::uint32_t> expected_components;
  std::map<ClassId, double> analytic_volume;
};

struct Result {
  LabelVolume volume;
  GroundTruth truth;
};

// Voxel-centre inclusion, deterministic in (spec, seed). Throws if the shapes
// do not fit inside the grid.
Result generate(const Spec& spec, const VoxelGrid3& grid);

// Tube with radius profile(k) at layer base_z + k on a heart base.
LabelVolume radius_profile_phantom(const std::vector<double>& profile, const VoxelGrid3& grid);

// Profile shaped like the dataset-wide aorta cross-section curve: rising to a
// maximum about 10 voxels above the annulus, a minimum at 25, and a rise
// towards the arch after it. Index k holds the radius at distance k + 1.
std::vector<double> dataset_like_profile(std::size_t layers = 64);

// Voxels of `keep` within Euclidean `radius` (index units) of any voxel of
// `target`, found by enumerating every lattice offset of the ball.
BinaryMask oracle_within_distance(const BinaryMask& keep, const BinaryMask& target, double radius);

}  // namespace tavr::phantom
