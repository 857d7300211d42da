#pragma once

#include <map>

#include "tavr/voxel.hpp"

namespace tavr {

// Per-class skeletons on one grid. Only foreground classes with a non-empty
// label appear.
struct SkeletonMask {
  VoxelGrid3 grid;
  double tube_radius = 0.0;
  std::map<ClassId, BinaryMask> per_class;

  bool empty() const { return per_class.empty(); }
};

// Topology-preserving thinning: repeated directional sweeps (+z, -z, +y, -y,
// +x, -x) remove border voxels that are simple and not curve end points,
// re-checking each candidate sequentially in scan order, until a full pass
// removes nothing. The result is a fixed point of the procedure.
BinaryMask skeletonize(const BinaryMask& mask);

// Skeleton dilated by a ball of `tube_radius` (index units); radius 0 is the
// bare skeleton.
BinaryMask tubed_skeleton(const BinaryMask& mask, double tube_radius);

SkeletonMask skeletons_for_volume(const LabelVolume& vol, double tube_radius = 0.0);

}  // namespace tavr
