#pragma once

#include <string>
#include <vector>

#include "tavr/distance.hpp"
#include "tavr/voxel.hpp"

namespace tavr {

struct EnrichConfig {
  double valve_distance = 3.0;     // aorta voxels within this distance of the ventricle
  double annulus_distance = 1.0;   // ventricle voxels within this distance of the aorta
  double sweep_max_distance = 60.0;
  double sweep_step = 1.0;
  double slab_half_width = 0.5;
  int smoothing_window = 5;        // odd; centred moving average
  double fallback_min_distance = 25.0;  // used when the curve has no max/min pair
  Metric metric = Metric::index_euclidean;
  // Derived classes, highest priority first, written over the original labels.
  std::vector<ClassId> precedence{cls::valve, cls::annulus, cls::aortic_root};
  // Classes that must have at least one voxel; otherwise the case is excluded.
  std::vector<ClassId> required{cls::aorta, cls::left_ventricle, cls::iliac_artery_left,
                                cls::iliac_artery_right};

  void validate() const;
};

// Annulus plane: centroid of the annulus voxel centres (index coordinates) and
// a unit normal oriented so that the aorta lies on the positive side.
struct PlaneFrame {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();

  double signed_distance(const Vec3& p) const { return normal.dot(p - point); }
};

struct CrossSectionCurve {
  std::vector<double> distances;
  std::vector<std::size_t> raw_counts;
  std::vector<double> smoothed;

  std::size_t size() const { return distances.size(); }
};

enum class RootStatus { found, fallback, failed };
std::string to_string(RootStatus s);

struct RootExtent {
  RootStatus status = RootStatus::failed;
  double max_distance = 0.0;
  double min_distance = 0.0;
  // Where the smoothed series has its minimum; min_distance is the raw-count
  // minimum found within one half-window of it.
  double smoothed_min_distance = 0.0;
};

struct RootResult {
  CrossSectionCurve curve;
  PlaneFrame plane;
  RootExtent extent;
  BinaryMask root_mask;
};

BinaryMask extract_valve(const BinaryMask& aorta, const BinaryMask& ventricle, const EnrichConfig& cfg = {});
BinaryMask extract_annulus(const BinaryMask& aorta, const BinaryMask& ventricle, const EnrichConfig& cfg = {});

// Total-least-squares plane through the annulus voxel centres. Throws on fewer
// than three voxels, collinear input ("degenerate annulus") or a repeated
// smallest covariance eigenvalue ("no unique plane").
PlaneFrame fit_annulus_plane(const BinaryMask& annulus, const BinaryMask& aorta);

// Centred moving average; the window shrinks symmetrically at the ends.
std::vector<double> moving_average(const std::vector<double>& values, int window);

CrossSectionCurve sweep_cross_sections(const BinaryMask& aorta, const PlaneFrame& plane,
                                       const EnrichConfig& cfg = {});

// First local maximum of the smoothed curve, then the first local minimum after
// it. A maximum plateau counts at its first index when the series leaves it
// downwards (or it runs to the end of the series); a minimum is the first j
// with s[j-1] > s[j] <= s[j+1], searched only up to the first empty cross
// section after the maximum (the end of the vessel). The minimum is then placed at the smallest raw
// count within half a window of the smoothed minimum, to undo the lag the
// smoothing introduces.
RootExtent detect_root_extent(const CrossSectionCurve& curve, int smoothing_window = 5);

BinaryMask extract_root(const BinaryMask& aorta, const PlaneFrame& plane, const RootExtent& extent);

struct EnrichResult {
  LabelVolume volume;
  RootResult root;
};

// Full rule chain on a copy of `vol`. Throws CaseExcluded when a required
// class has no voxels.
EnrichResult enrich_volume(const LabelVolume& vol, const EnrichConfig& cfg = {});

}  // namespace tavr
