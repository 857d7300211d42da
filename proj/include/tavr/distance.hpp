#pragma once

#include <vector>

#include "tavr/voxel.hpp"

namespace tavr {

enum class Metric {
  index_euclidean,  // voxel-index units, spacing ignored (default for the labeling rules)
  world_euclidean,  // millimetres along the grid axes, using voxel spacing
};

// Absolute slack applied when comparing a distance against a threshold, so
// that e.g. sqrt(3) <= sqrt(3) survives rounding. Far below the gap between
// distinct lattice distances in any realistic grid.
inline constexpr double kDistanceTolerance = 1e-9;

inline bool within_distance(double d, double radius) { return d <= radius + kDistanceTolerance; }

class DistanceField {
 public:
  DistanceField(VoxelGrid3 grid, Metric metric, std::vector<double> values, double sentinel);

  const VoxelGrid3& grid() const { return grid_; }
  Metric metric() const { return metric_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return values_[grid_.linear(x, y, z)];
  }
  const std::vector<double>& values() const { return values_; }

  // Value stored everywhere when the source mask was empty: grid diagonal
  // (in the field's metric) plus one.
  double sentinel() const { return sentinel_; }

 private:
  VoxelGrid3 grid_;
  Metric metric_;
  std::vector<double> values_;
  double sentinel_;
};

// Exact Euclidean distance from every voxel centre to the nearest foreground
// voxel centre. Separable lower-envelope-of-parabolas algorithm, linear per axis.
DistanceField edt(const BinaryMask& mask, Metric metric = Metric::index_euclidean);

// Squared distances, +inf where no foreground exists. Exposed for callers that
// want to avoid the square root.
std::vector<double> edt_squared(const BinaryMask& mask, Metric metric = Metric::index_euclidean);

// Ball dilation: voxels whose distance to the mask is <= radius.
BinaryMask dilate(const BinaryMask& mask, double radius, Metric metric = Metric::index_euclidean);

}  // namespace tavr
