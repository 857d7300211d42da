#include "tavr/enrich.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace tavr {

namespace {

constexpr double kSlack = 1e-9;

void validate_pair(const BinaryMask& aorta, const BinaryMask& ventricle) {
  require_same_grid(aorta.grid(), ventricle.grid(), "aorta and ventricle masks");
}

// Voxels of `keep` whose distance to `target` is within `radius`.
BinaryMask within_of(const BinaryMask& keep, const BinaryMask& target, double radius, Metric metric) {
  BinaryMask out(keep.grid());
  if (target.empty()) return out;
  const std::vector<double> sq = edt_squared(target, metric);
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i] && within_distance(std::sqrt(sq[i]), radius)) out.set(i);
  return out;
}

Vec3 center_of(const VoxelGrid3& grid, std::size_t i) {
  const Index3 p = grid.index(i);
  return {static_cast<double>(p.x), static_cast<double>(p.y), static_cast<double>(p.z)};
}

}  // namespace

std::string to_string(RootStatus s) {
  switch (s) {
    case RootStatus::found: return "found";
    case RootStatus::fallback: return "fallback";
    case RootStatus::failed: return "failed";
  }
  return "unknown";
}

void EnrichConfig::validate() const {
  if (!(valve_distance > 0 && annulus_distance > 0 && sweep_max_distance > 0 && sweep_step > 0 &&
        slab_half_width > 0 && fallback_min_distance >= 0))
    throw Error("enrich config: distances must be positive");
  if (smoothing_window <= 0 || smoothing_window % 2 == 0)
    throw Error("enrich config: smoothing_window must be a positive odd integer");
  std::vector<ClassId> sorted = precedence;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::vector<ClassId>{cls::aortic_root, cls::valve, cls::annulus})
    throw Error("enrich config: precedence must list valve, annulus and aortic_root exactly once");
}

BinaryMask extract_valve(const BinaryMask& aorta, const BinaryMask& ventricle, const EnrichConfig& cfg) {
  validate_pair(aorta, ventricle);
  return within_of(aorta, ventricle, cfg.valve_distance, cfg.metric);
}

BinaryMask extract_annulus(const BinaryMask& aorta, const BinaryMask& ventricle, const EnrichConfig& cfg) {
  validate_pair(aorta, ventricle);
  return within_of(ventricle, aorta, cfg.annulus_distance, cfg.metric);
}

PlaneFrame fit_annulus_plane(const BinaryMask& annulus, const BinaryMask& aorta) {
  require_same_grid(annulus.grid(), aorta.grid(), "annulus and aorta masks");
  const auto idx = annulus.indices();
  if (idx.size() < 3) throw Error("degenerate annulus: fewer than 3 voxels");

  Vec3 centroid = Vec3::Zero();
  for (std::size_t i : idx) centroid += center_of(annulus.grid(), i);
  centroid /= static_cast<double>(idx.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i : idx) {
    const Vec3 d = center_of(annulus.grid(), i) - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(idx.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Vec3 ev = solver.eigenvalues();  // ascending
  if (ev(2) <= 0.0 || ev(1) <= 1e-10 * ev(2)) throw Error("degenerate annulus: voxels are collinear");
  if (ev(1) - ev(0) <= 1e-9 * ev(2)) throw Error("no unique plane: annulus is isotropic");

  PlaneFrame plane{centroid, solver.eigenvectors().col(0).normalized()};
  double mean = 0.0;
  const auto aorta_idx = aorta.indices();
  for (std::size_t i : aorta_idx) mean += plane.signed_distance(center_of(aorta.grid(), i));
  if (!aorta_idx.empty() && mean < 0.0) plane.normal = -plane.normal;
  return plane;
}

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window <= 0 || window % 2 == 0) throw Error("moving average window must be odd and positive");
  const auto n = static_cast<std::int64_t>(values.size());
  std::vector<double> out(values.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t h = std::min<std::int64_t>({window / 2, i, n - 1 - i});
    double sum = 0.0;
    for (std::int64_t k = i - h; k <= i + h; ++k) sum += values[k];
    out[i] = sum / static_cast<double>(2 * h + 1);
  }
  return out;
}

CrossSectionCurve sweep_cross_sections(const BinaryMask& aorta, const PlaneFrame& plane,
                                       const EnrichConfig& cfg) {
  cfg.validate();
  const auto steps = static_cast<std::int64_t>(std::floor(cfg.sweep_max_distance / cfg.sweep_step + kSlack));
  CrossSectionCurve curve;
  for (std::int64_t k = 0; k <= steps; ++k) curve.distances.push_back(static_cast<double>(k) * cfg.sweep_step);
  curve.raw_counts.assign(curve.distances.size(), 0);

  const double hw = cfg.slab_half_width;
  for (std::size_t i = 0; i < aorta.size(); ++i) {
    if (!aorta[i]) continue;
    const double s = plane.signed_distance(center_of(aorta.grid(), i));
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((s - hw) / cfg.sweep_step)) - 1);
    const auto hi = std::min<std::int64_t>(steps, static_cast<std::int64_t>(std::floor((s + hw) / cfg.sweep_step)) + 1);
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double d = curve.distances[k];
      if (d - hw <= s && s < d + hw) ++curve.raw_counts[k];
    }
  }
  std::vector<double> raw(curve.raw_counts.begin(), curve.raw_counts.end());
  curve.smoothed = moving_average(raw, cfg.smoothing_window);
  return curve;
}

namespace {

// First plateau start i >= from with s[i-1] < s[i] that the series leaves
// downwards (or that runs to the end with length >= 2).
std::optional<std::size_t> find_maximum(const std::vector<double>& s, std::size_t from) {
  const std::size_t n = s.size();
  for (std::size_t i = std::max<std::size_t>(from, 1); i < n; ++i) {
    if (!(s[i - 1] < s[i])) continue;
    std::size_t e = i;
    while (e + 1 < n && s[e + 1] == s[i]) ++e;
    if (e + 1 < n ? s[e + 1] < s[i] : e > i) return i;
  }
  return std::nullopt;
}

// First j in [from, end) with s[j-1] > s[j] <= s[j+1], j+1 < end.
std::optional<std::size_t> find_minimum(const std::vector<double>& s, std::size_t from, std::size_t end) {
  for (std::size_t j = std::max<std::size_t>(from, 1); j + 1 < end; ++j)
    if (s[j - 1] > s[j] && s[j] <= s[j + 1]) return j;
  return std::nullopt;
}

}  // namespace

RootExtent detect_root_extent(const CrossSectionCurve& curve, int smoothing_window) {
  if (curve.size() == 0) throw Error("empty cross-section curve");
  if (curve.smoothed.size() != curve.size() || curve.raw_counts.size() != curve.size())
    throw Error("cross-section curve columns have unequal lengths");
  if (curve.size() < static_cast<std::size_t>(smoothing_window))
    throw Error("cross-section curve is shorter than the smoothing window");

  const auto& s = curve.smoothed;
  RootExtent out;
  const auto max_i = find_maximum(s, 1);
  if (!max_i) return out;
  // Past the end of the vessel the curve is an artifact, not a waist.
  std::size_t end = *max_i + 1;
  while (end < curve.size() && curve.raw_counts[end] > 0) ++end;
  const auto min_j = find_minimum(s, *max_i + 1, end);
  if (!min_j) return out;

  const std::size_t half = static_cast<std::size_t>(smoothing_window / 2);
  const std::size_t lo = std::max(*min_j > half ? *min_j - half : 0, *max_i + 1);
  const std::size_t hi = std::min(*min_j + half, end - 1);
  std::size_t best = lo;
  for (std::size_t k = lo; k <= hi; ++k)
    if (curve.raw_counts[k] < curve.raw_counts[best]) best = k;

  out.status = RootStatus::found;
  out.max_distance = curve.distances[*max_i];
  out.smoothed_min_distance = curve.distances[*min_j];
  out.min_distance = curve.distances[best];
  return out;
}

BinaryMask extract_root(const BinaryMask& aorta, const PlaneFrame& plane, const RootExtent& extent) {
  if (extent.status == RootStatus::failed) throw Error("aortic root extent was not found");
  BinaryMask out(aorta.grid());
  for (std::size_t i = 0; i < aorta.size(); ++i) {
    if (!aorta[i]) continue;
    const double s = plane.signed_distance(center_of(aorta.grid(), i));
    if (s >= -kSlack && s <= extent.min_distance + kSlack) out.set(i);
  }
  return out;
}

EnrichResult enrich_volume(const LabelVolume& vol, const EnrichConfig& cfg) {
  cfg.validate();
  const ClassMap& classes = vol.classes();
  for (ClassId c : cfg.required) {
    if (!classes.contains(c))
      throw CaseExcluded("case excluded: class id " + std::to_string(c) + " is not registered");
    if (vol.count(c) == 0) throw CaseExcluded("case excluded: no " + classes.name_of(c) + " voxels");
  }
  for (ClassId c : {cls::aorta, cls::left_ventricle, cls::valve, cls::annulus, cls::aortic_root})
    if (!classes.contains(c))
      throw Error("class map lacks class id " + std::to_string(c) + " needed for enrichment");

  const BinaryMask aorta = class_mask(vol, cls::aorta);
  const BinaryMask ventricle = class_mask(vol, cls::left_ventricle);
  if (aorta.empty() || ventricle.empty())
    throw CaseExcluded("case excluded: aorta and left ventricle are both required");

  const BinaryMask valve = extract_valve(aorta, ventricle, cfg);
  const BinaryMask annulus = extract_annulus(aorta, ventricle, cfg);

  RootResult root;
  root.plane = fit_annulus_plane(annulus, aorta);
  root.curve = sweep_cross_sections(aorta, root.plane, cfg);
  root.extent = detect_root_extent(root.curve, cfg.smoothing_window);
  if (root.extent.status == RootStatus::failed) {
    root.extent.status = RootStatus::fallback;
    root.extent.min_distance = cfg.fallback_min_distance;
    root.extent.smoothed_min_distance = cfg.fallback_min_distance;
  }
  root.root_mask = extract_root(aorta, root.plane, root.extent);

  LabelVolume out = vol;
  for (auto it = cfg.precedence.rbegin(); it != cfg.precedence.rend(); ++it) {
    switch (*it) {
      case cls::valve: out.paint(valve, cls::valve); break;
      case cls::annulus: out.paint(annulus, cls::annulus); break;
      case cls::aortic_root: out.paint(root.root_mask, cls::aortic_root); break;
      default: break;
    }
  }
  return {std::move(out), std::move(root)};
}

}  // namespace tavr
