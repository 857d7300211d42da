#include "tavr/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tavr/components.hpp"
#include "tavr/topology.hpp"

namespace tavr::phantom {

namespace {

struct KindName {
  Kind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {Kind::box_interface, "box_interface"},
    {Kind::cylinder_bulb, "cylinder_bulb"},
    {Kind::radius_profile, "radius_profile"},
    {Kind::y_bifurcation, "y_bifurcation"},
    {Kind::seven_class_composite, "seven_class_composite"},
};

double sq(double v) { return v * v; }

struct Column {
  double cx, cy;
};

Column central_column(const VoxelGrid3& grid) {
  const Dims& d = grid.dims();
  return {static_cast<double>((d.nx - 1) / 2), static_cast<double>((d.ny - 1) / 2)};
}

void require_fits(bool ok, const std::string& what) {
  if (!ok) throw Error("phantom geometry exceeds grid: " + what);
}

// Toggle boundary voxels of each foreground class at random, but only when the
// voxel is a simple point of that class so the topology is unchanged, and only
// between the class and background. Boundary means boundary of the unjittered
// shape, so no voxel moves by more than one layer.
void apply_jitter(LabelVolume& vol, double probability, std::uint64_t seed) {
  if (probability <= 0.0) return;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const VoxelGrid3& grid = vol.grid();
  const Dims& d = grid.dims();
  for (ClassId c : vol.classes().foreground()) {
    if (vol.count(c) == 0) continue;
    BinaryMask mask = class_mask(vol, c);
    const BinaryMask original = mask;
    for (std::size_t i = 0; i < vol.size(); ++i) {
      const ClassId here = vol[i];
      if (here != c && here != cls::background) continue;
      const Index3 p = grid.index(i);
      bool touches_other = false, face_contact = false, face_background = false;
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (!dx && !dy && !dz) continue;
            const std::int64_t x = p.x + dx, y = p.y + dy, z = p.z + dz;
            const bool face = std::abs(dx) + std::abs(dy) + std::abs(dz) == 1;
            if (!d.contains(x, y, z)) {
              if (face) face_background = true;
              continue;
            }
            const ClassId n = vol.at(x, y, z);
            if (n != c && n != cls::background) touches_other = true;
            if (face && original.at(x, y, z)) face_contact = true;
            if (face && !original.at(x, y, z) && n == cls::background) face_background = true;
          }
      if (touches_other) continue;
      const bool boundary = here == c ? face_background : face_contact;
      if (!boundary || coin(rng) >= probability) continue;
      // Never touch the outermost layer so shapes stay inside the grid.
      if (p.x == 0 || p.y == 0 || p.z == 0 || p.x == d.nx - 1 || p.y == d.ny - 1 || p.z == d.nz - 1) continue;
      const auto n = topology::neighborhood(mask, p.x, p.y, p.z);
      if (!topology::is_simple(n)) continue;
      if (here == c && topology::object_neighbors(n) <= 1) continue;
      const ClassId next = here == c ? cls::background : c;
      vol.set(i, next);
      mask.set(i, next == c);
    }
  }
}

std::uint32_t components_of(const LabelVolume& vol, ClassId c) {
  return count_components(class_mask(vol, c), Connectivity::full26);
}

struct HeartBase {
  std::int64_t top = 0;
  double max_radius = 0.0;
};

// Ventricle box, aorta where `in_aorta`, and the two iliac tubes.
template <typename InAorta>
HeartBase build_heart_base(LabelVolume& vol, const Spec& spec, double max_radius, InAorta in_aorta) {
  const VoxelGrid3& grid = vol.grid();
  const Dims& d = grid.dims();
  const auto [cx, cy] = central_column(grid);
  HeartBase hb;
  hb.top = spec.top_z < 0 ? d.nz - 3 : spec.top_z;
  hb.max_radius = max_radius;
  const double vhw = spec.ventricle_half_width < 0 ? max_radius + 2.0 : spec.ventricle_half_width;
  const double iliac_offset = max_radius + 4.0;

  require_fits(spec.base_z - spec.ventricle_depth >= 1, "ventricle below z=1");
  require_fits(hb.top <= d.nz - 1 && hb.top > spec.base_z, "aorta top");
  require_fits(cx - vhw >= 1 && cx + vhw <= static_cast<double>(d.nx - 2), "ventricle x extent");
  require_fits(cy - vhw >= 1 && cy + vhw <= static_cast<double>(d.ny - 2), "ventricle y extent");
  require_fits(cx - iliac_offset - spec.iliac_radius >= 0 &&
                   cx + iliac_offset + spec.iliac_radius <= static_cast<double>(d.nx - 1),
               "iliac arteries x extent");
  require_fits(cy - max_radius >= 0 && cy + max_radius <= static_cast<double>(d.ny - 1), "aorta y extent");
  require_fits(vhw >= max_radius, "ventricle narrower than the aorta");

  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const double fx = static_cast<double>(x), fy = static_cast<double>(y), fz = static_cast<double>(z);
        if (z >= spec.base_z - spec.ventricle_depth && z < spec.base_z) {
          if (std::abs(fx - cx) <= vhw && std::abs(fy - cy) <= vhw) vol.set(x, y, z, cls::left_ventricle);
          continue;
        }
        if (z < spec.base_z || z > hb.top) continue;
        if (in_aorta(fx - cx, fy - cy, fz)) {
          vol.set(x, y, z, cls::aorta);
        } else if (sq(fx - (cx - iliac_offset)) + sq(fy - cy) <= sq(spec.iliac_radius)) {
          vol.set(x, y, z, cls::iliac_artery_left);
        } else if (sq(fx - (cx + iliac_offset)) + sq(fy - cy) <= sq(spec.iliac_radius)) {
          vol.set(x, y, z, cls::iliac_artery_right);
        }
      }
  return hb;
}

void fill_heart_truth(GroundTruth& t, const LabelVolume& vol, const Spec& spec) {
  const auto [cx, cy] = central_column(vol.grid());
  t.annulus_plane = PlaneFrame{Vec3(cx, cy, static_cast<double>(spec.base_z - 1)), Vec3::UnitZ()};
  const BinaryMask aorta = class_mask(vol, cls::aorta);
  const BinaryMask ventricle = class_mask(vol, cls::left_ventricle);
  t.expected_valve = oracle_within_distance(aorta, ventricle, 3.0);
  t.expected_annulus = oracle_within_distance(ventricle, aorta, 1.0);
}

double bulb_area(const Spec& s, double z) {
  return std::numbers::pi * std::max(sq(s.tube_radius), sq(s.bulb_radius) - sq(z - s.bulb_center_z));
}

Result cylinder_bulb(const Spec& spec, const VoxelGrid3& grid, const ClassMap& classes) {
  if (!(spec.tube_radius > 0 && spec.bulb_radius > spec.tube_radius))
    throw Error("cylinder_bulb needs 0 < tube_radius < bulb_radius");
  Result r{LabelVolume(grid, classes), {}};
  const double rr = sq(spec.tube_radius), bb = sq(spec.bulb_radius);
  const HeartBase hb = build_heart_base(r.volume, spec, spec.bulb_radius, [&](double dx, double dy, double z) {
    const double rho = dx * dx + dy * dy;
    return rho <= rr || rho + sq(z - spec.bulb_center_z) <= bb;
  });
  require_fits(spec.bulb_center_z + std::sqrt(bb - rr) < static_cast<double>(hb.top), "bulb waist above aorta top");

  const double plane_z = static_cast<double>(spec.base_z - 1);
  r.truth.bulb_equator_distance = spec.bulb_center_z - plane_z;
  r.truth.waist_distance = spec.bulb_center_z + std::sqrt(bb - rr) - plane_z;

  // Cross-sectional area integrated over the voxel-centre slab of each layer.
  double volume = 0.0;
  const double lo = static_cast<double>(spec.base_z) - 0.5, hi = static_cast<double>(hb.top) + 0.5;
  const int steps = 20000;
  const double h = (hi - lo) / steps;
  for (int k = 0; k < steps; ++k) volume += bulb_area(spec, lo + (k + 0.5) * h) * h;
  r.truth.analytic_volume[cls::aorta] = volume;
  r.truth.analytic_volume[cls::iliac_artery_left] = std::numbers::pi * sq(spec.iliac_radius) * (hi - lo);
  r.truth.analytic_volume[cls::iliac_artery_right] = r.truth.analytic_volume[cls::iliac_artery_left];
  return r;
}

// First interior maximum then minimum of a sampled profile (plateau start).
void profile_extrema(const std::vector<double>& profile, GroundTruth& t) {
  const std::size_t n = profile.size();
  std::size_t i = 1;
  for (; i + 1 < n; ++i)
    if (profile[i - 1] < profile[i] && profile[i] >= profile[i + 1]) break;
  if (i + 1 >= n) return;
  t.profile_max_distance = static_cast<double>(i + 1);
  for (std::size_t j = i + 1; j + 1 < n; ++j)
    if (profile[j - 1] > profile[j] && profile[j] <= profile[j + 1]) {
      t.profile_min_distance = static_cast<double>(j + 1);
      return;
    }
}

Result radius_profile(const Spec& spec, const VoxelGrid3& grid, const ClassMap& classes) {
  if (spec.profile.empty()) throw Error("radius_profile needs a non-empty profile");
  for (double r : spec.profile)
    if (!(r > 0)) throw Error("radius_profile radii must be positive");
  Spec s = spec;
  s.top_z = spec.base_z + static_cast<std::int64_t>(spec.profile.size()) - 1;
  const double max_r = *std::max_element(spec.profile.begin(), spec.profile.end());
  Result r{LabelVolume(grid, classes), {}};
  build_heart_base(r.volume, s, max_r, [&](double dx, double dy, double z) {
    const auto k = static_cast<std::size_t>(z) - static_cast<std::size_t>(s.base_z);
    return dx * dx + dy * dy <= sq(s.profile[k]);
  });
  profile_extrema(spec.profile, r.truth);
  double volume = 0.0;
  for (double rad : spec.profile) volume += std::numbers::pi * sq(rad);
  r.truth.analytic_volume[cls::aorta] = volume;
  return r;
}

Result box_interface(const Spec& spec, const VoxelGrid3& grid, const ClassMap& classes) {
  const Dims& d = grid.dims();
  const std::int64_t m = spec.margin, mid = d.nz / 2;
  require_fits(m >= 0 && spec.gap >= 0 && spec.inset >= 0, "negative box parameter");
  require_fits(mid - 1 >= m && mid + spec.gap <= d.nz - 1 - m, "box z extent");
  require_fits(m + spec.inset <= d.nx - 1 - m - spec.inset && m + spec.inset <= d.ny - 1 - m - spec.inset,
               "box x/y extent");
  Result r{LabelVolume(grid, classes), {}};
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const bool in_v = x >= m && x <= d.nx - 1 - m && y >= m && y <= d.ny - 1 - m && z >= m && z <= mid - 1;
        const std::int64_t a = m + spec.inset;
        const bool in_a = x >= a && x <= d.nx - 1 - a && y >= a && y <= d.ny - 1 - a && z >= mid + spec.gap &&
                          z <= d.nz - 1 - m;
        if (in_v) r.volume.set(x, y, z, cls::left_ventricle);
        if (in_a) r.volume.set(x, y, z, cls::aorta);
      }
  const double ax = static_cast<double>(d.nx - 1) / 2.0, ay = static_cast<double>(d.ny - 1) / 2.0;
  r.truth.annulus_plane = PlaneFrame{Vec3(ax, ay, static_cast<double>(mid - 1)), Vec3::UnitZ()};
  return r;
}

double segment_distance_sq(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).squaredNorm();
}

Result y_bifurcation(const Spec& spec, const VoxelGrid3& grid, const ClassMap& classes) {
  const Dims& d = grid.dims();
  const auto [cx, cy] = central_column(grid);
  const double br = spec.branch_radius;
  if (!(br > 0)) throw Error("y_bifurcation needs a positive branch radius");
  if (!classes.contains(spec.label)) throw Error("y_bifurcation label is not registered");
  const Vec3 root(cx, cy, 1.0 + br);
  const Vec3 fork(cx, cy, static_cast<double>(d.nz / 2));
  const Vec3 left(cx - spec.branch_spread, cy, static_cast<double>(d.nz - 2) - br);
  const Vec3 right(cx + spec.branch_spread, cy, static_cast<double>(d.nz - 2) - br);
  require_fits(left.x() - br >= 0 && right.x() + br <= static_cast<double>(d.nx - 1), "branch x extent");
  require_fits(cy - br >= 0 && cy + br <= static_cast<double>(d.ny - 1), "branch y extent");
  require_fits(fork.z() > root.z() && left.z() > fork.z(), "branch z extent");
  Result r{LabelVolume(grid, classes), {}};
  const double rr = br * br;
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const Vec3 p(static_cast<double>(x), static_cast<double>(y), static_cast<double>(z));
        if (segment_distance_sq(p, root, fork) <= rr || segment_distance_sq(p, fork, left) <= rr ||
            segment_distance_sq(p, fork, right) <= rr)
          r.volume.set(x, y, z, spec.label);
      }
  return r;
}

Result seven_class_composite(const Spec& spec, const VoxelGrid3& grid, const ClassMap& classes) {
  Result r = cylinder_bulb(spec, grid, classes);
  LabelVolume& vol = r.volume;
  const Dims& d = grid.dims();
  const BinaryMask aorta = class_mask(vol, cls::aorta);

  // Aorta voxels per layer; the root ends at the first layer past the bulb
  // equator whose cross-section is back to the bare tube.
  std::vector<std::size_t> layer(static_cast<std::size_t>(d.nz), 0);
  for (std::size_t i = 0; i < aorta.size(); ++i)
    if (aorta[i]) ++layer[static_cast<std::size_t>(grid.index(i).z)];
  const std::int64_t top = spec.top_z < 0 ? d.nz - 3 : spec.top_z;
  const std::size_t tube = layer[static_cast<std::size_t>(top)];
  std::int64_t root_end = static_cast<std::int64_t>(std::ceil(spec.bulb_center_z));
  while (root_end < d.nz && layer[static_cast<std::size_t>(root_end)] != tube) ++root_end;

  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const ClassId c = vol.at(x, y, z);
        if (c == cls::aorta) {
          if (z <= spec.base_z + 2) vol.set(x, y, z, cls::valve);
          else if (z <= root_end) vol.set(x, y, z, cls::aortic_root);
        } else if (c == cls::left_ventricle && z == spec.base_z - 1 && aorta.at(x, y, spec.base_z)) {
          vol.set(x, y, z, cls::annulus);
        }
      }
  r.truth.analytic_volume.clear();
  return r;
}

}  // namespace

std::string to_string(Kind k) {
  for (const auto& e : kKindNames)
    if (e.kind == k) return e.name;
  return "unknown";
}

Kind kind_from_string(std::string_view name) {
  for (const auto& e : kKindNames)
    if (name == e.name) return e.kind;
  throw Error("unknown phantom kind '" + std::string(name) + "'");
}

BinaryMask oracle_within_distance(const BinaryMask& keep, const BinaryMask& target, double radius) {
  require_same_grid(keep.grid(), target.grid(), "oracle masks");
  const auto reach = static_cast<std::int64_t>(std::floor(radius + 1e-9));
  std::vector<Index3> ball;
  for (std::int64_t dz = -reach; dz <= reach; ++dz)
    for (std::int64_t dy = -reach; dy <= reach; ++dy)
      for (std::int64_t dx = -reach; dx <= reach; ++dx)
        if (within_distance(std::sqrt(static_cast<double>(dx * dx + dy * dy + dz * dz)), radius))
          ball.push_back({dx, dy, dz});
  const VoxelGrid3& grid = keep.grid();
  const Dims& d = grid.dims();
  BinaryMask out(grid);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    const Index3 p = grid.index(i);
    for (const Index3& o : ball) {
      const std::int64_t x = p.x + o.x, y = p.y + o.y, z = p.z + o.z;
      if (d.contains(x, y, z) && target.at(x, y, z)) {
        out.set(i);
        break;
      }
    }
  }
  return out;
}

Result generate(const Spec& spec, const VoxelGrid3& grid) {
  const ClassMap& classes = ClassMap::tavr();
  Result r;
  switch (spec.kind) {
    case Kind::box_interface: r = box_interface(spec, grid, classes); break;
    case Kind::cylinder_bulb: r = cylinder_bulb(spec, grid, classes); break;
    case Kind::radius_profile: r = radius_profile(spec, grid, classes); break;
    case Kind::y_bifurcation: r = y_bifurcation(spec, grid, classes); break;
    case Kind::seven_class_composite: r = seven_class_composite(spec, grid, classes); break;
  }
  if (!(spec.jitter >= 0.0 && spec.jitter <= 1.0)) throw Error("jitter must be a probability");
  if (spec.jitter > 0.0) {
    apply_jitter(r.volume, spec.jitter, spec.seed);
    r.truth.analytic_volume.clear();
  }

  if (spec.kind == Kind::box_interface || spec.kind == Kind::cylinder_bulb || spec.kind == Kind::radius_profile) {
    if (spec.kind != Kind::box_interface) fill_heart_truth(r.truth, r.volume, spec);
    else {
      const BinaryMask aorta = class_mask(r.volume, cls::aorta);
      const BinaryMask ventricle = class_mask(r.volume, cls::left_ventricle);
      r.truth.expected_valve = oracle_within_distance(aorta, ventricle, 3.0);
      r.truth.expected_annulus = oracle_within_distance(ventricle, aorta, 1.0);
    }
  }
  for (ClassId c : classes.foreground())
    if (r.volume.count(c) > 0) r.truth.expected_components[c] = components_of(r.volume, c);
  return r;
}

LabelVolume radius_profile_phantom(const std::vector<double>& profile, const VoxelGrid3& grid) {
  Spec spec;
  spec.kind = Kind::radius_profile;
  spec.profile = profile;
  spec.base_z = spec.ventricle_depth + 1;
  return generate(spec, grid).volume;
}

std::vector<double> dataset_like_profile(std::size_t layers) {
  struct Knot {
    double d, r;
  };
  static constexpr Knot knots[] = {{1, 9.0}, {10, 13.0}, {25, 10.0}, {50, 12.5}};
  std::vector<double> out(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    const double d = static_cast<double>(k + 1);
    double r = knots[std::size(knots) - 1].r;
    for (std::size_t j = 0; j + 1 < std::size(knots); ++j) {
      if (d >= knots[j].d && d <= knots[j + 1].d) {
        const double t = (d - knots[j].d) / (knots[j + 1].d - knots[j].d);
        const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * t);
        r = knots[j].r + (knots[j + 1].r - knots[j].r) * w;
        break;
      }
    }
    out[k] = r;
  }
  return out;
}

}  // namespace tavr::phantom
