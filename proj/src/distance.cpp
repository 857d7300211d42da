#include "tavr/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tavr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-dimensional squared distance transform of a sampled function f under
// weight w: out[q] = min_p f[p] + w (q - p)^2. Entries of f may be +inf.
// Scratch buffers are passed in to avoid reallocation per line.
void envelope_1d(const double* f, double* out, std::int64_t n, double w, std::vector<std::int64_t>& v,
                 std::vector<double>& z) {
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    const double fq = f[q] + w * static_cast<double>(q) * static_cast<double>(q);
    while (k >= 0) {
      const std::int64_t p = v[k];
      const double fp = f[p] + w * static_cast<double>(p) * static_cast<double>(p);
      const double s = (fq - fp) / (2.0 * w * static_cast<double>(q - p));
      if (s <= z[k]) {
        --k;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
      break;
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
    }
  }
  if (k < 0) {
    for (std::int64_t q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  std::int64_t j = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (z[j + 1] < static_cast<double>(q)) ++j;
    const double d = static_cast<double>(q - v[j]);
    out[q] = w * d * d + f[v[j]];
  }
}

}  // namespace

DistanceField::DistanceField(VoxelGrid3 grid, Metric metric, std::vector<double> values,
                             double sentinel)
    : grid_(std::move(grid)), metric_(metric), values_(std::move(values)), sentinel_(sentinel) {
  if (values_.size() != grid_.size()) throw Error("distance field size does not match grid");
}

std::vector<double> edt_squared(const BinaryMask& mask, Metric metric) {
  const Dims d = mask.grid().dims();
  const Vec3 w = metric == Metric::world_euclidean ? Vec3(mask.grid().spacing().cwiseAbs2())
                                                   : Vec3(Vec3::Ones());
  const std::size_t n = mask.size();
  std::vector<double> field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = mask[i] ? 0.0 : kInf;

  const std::int64_t longest = std::max({d.nx, d.ny, d.nz});
  std::vector<std::int64_t> v(longest);
  std::vector<double> z(longest + 1), line(longest), out(longest);

  // x: lines are contiguous.
  for (std::int64_t zz = 0; zz < d.nz; ++zz)
    for (std::int64_t y = 0; y < d.ny; ++y) {
      double* row = field.data() + mask.grid().linear(0, y, zz);
      std::copy(row, row + d.nx, line.begin());
      envelope_1d(line.data(), row, d.nx, w.x(), v, z);
    }

  // y and z: gather strided lines.
  const auto strided_pass = [&](std::int64_t len, std::int64_t stride, double weight,
                                std::int64_t outer_a, std::int64_t outer_b, auto base_of) {
    for (std::int64_t a = 0; a < outer_a; ++a)
      for (std::int64_t b = 0; b < outer_b; ++b) {
        const std::size_t base = base_of(a, b);
        for (std::int64_t t = 0; t < len; ++t) line[t] = field[base + t * stride];
        envelope_1d(line.data(), out.data(), len, weight, v, z);
        for (std::int64_t t = 0; t < len; ++t) field[base + t * stride] = out[t];
      }
  };
  strided_pass(d.ny, d.nx, w.y(), d.nz, d.nx,
               [&](std::int64_t zz, std::int64_t x) { return mask.grid().linear(x, 0, zz); });
  strided_pass(d.nz, d.nx * d.ny, w.z(), d.ny, d.nx,
               [&](std::int64_t y, std::int64_t x) { return mask.grid().linear(x, y, 0); });
  return field;
}

DistanceField edt(const BinaryMask& mask, Metric metric) {
  const Dims d = mask.grid().dims();
  double sentinel = mask.grid().diagonal() + 1.0;
  if (metric == Metric::world_euclidean) {
    const Vec3 extent(static_cast<double>(d.nx) * mask.grid().spacing().x(),
                      static_cast<double>(d.ny) * mask.grid().spacing().y(),
                      static_cast<double>(d.nz) * mask.grid().spacing().z());
    sentinel = extent.norm() + 1.0;
  }
  std::vector<double> values = edt_squared(mask, metric);
  for (double& x : values) x = x == kInf ? sentinel : std::sqrt(x);
  return DistanceField(mask.grid(), metric, std::move(values), sentinel);
}

BinaryMask dilate(const BinaryMask& mask, double radius, Metric metric) {
  if (!(radius >= 0.0)) throw Error("dilation radius must be non-negative");
  if (radius == 0.0) return mask;
  const std::vector<double> sq = edt_squared(mask, metric);
  BinaryMask out(mask.grid());
  for (std::size_t i = 0; i < sq.size(); ++i)
    if (sq[i] != kInf && within_distance(std::sqrt(sq[i]), radius)) out.set(i);
  return out;
}

}  // namespace tavr
