#include "tavr/io/nifti.hpp"

#include <algorithm>
#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace tavr::io {

static_assert(std::endian::native == std::endian::little, "NIfTI I/O assumes a little-endian host");

namespace {

#pragma pack(push, 1)
struct Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1, intent_p2, intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope, scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max, cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax, glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code, sform_code;
  float quatern_b, quatern_c, quatern_d;
  float qoffset_x, qoffset_y, qoffset_z;
  float srow_x[4], srow_y[4], srow_z[4];
  char intent_name[16];
  char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Header) == 348);

int bytes_per_voxel(std::int16_t datatype) {
  switch (datatype) {
    case nifti_type::uint8:
    case nifti_type::int8: return 1;
    case nifti_type::int16:
    case nifti_type::uint16: return 2;
    case nifti_type::int32:
    case nifti_type::uint32:
    case nifti_type::float32: return 4;
    case nifti_type::float64: return 8;
    default: throw Error("unsupported NIfTI datatype " + std::to_string(datatype));
  }
}

template <typename T>
double load(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double decode(std::int16_t datatype, const std::uint8_t* p) {
  switch (datatype) {
    case nifti_type::uint8: return load<std::uint8_t>(p);
    case nifti_type::int8: return load<std::int8_t>(p);
    case nifti_type::int16: return load<std::int16_t>(p);
    case nifti_type::uint16: return load<std::uint16_t>(p);
    case nifti_type::int32: return load<std::int32_t>(p);
    case nifti_type::uint32: return load<std::uint32_t>(p);
    case nifti_type::float32: return load<float>(p);
    case nifti_type::float64: return load<double>(p);
    default: throw Error("unsupported NIfTI datatype " + std::to_string(datatype));
  }
}

template <typename T>
void store(std::uint8_t* p, double v) {
  const T t = static_cast<T>(v);
  std::memcpy(p, &t, sizeof(T));
}

void encode(std::int16_t datatype, std::uint8_t* p, double v) {
  switch (datatype) {
    case nifti_type::uint8: store<std::uint8_t>(p, v); break;
    case nifti_type::int8: store<std::int8_t>(p, v); break;
    case nifti_type::int16: store<std::int16_t>(p, v); break;
    case nifti_type::uint16: store<std::uint16_t>(p, v); break;
    case nifti_type::int32: store<std::int32_t>(p, v); break;
    case nifti_type::uint32: store<std::uint32_t>(p, v); break;
    case nifti_type::float32: store<float>(p, v); break;
    case nifti_type::float64: store<double>(p, v); break;
    default: throw Error("unsupported NIfTI datatype " + std::to_string(datatype));
  }
}

bool is_gzip_path(const std::filesystem::path& path) { return path.extension() == ".gz"; }

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  int got = 0;
  while ((got = gzread(f, buf, sizeof buf)) > 0) out.insert(out.end(), buf, buf + got);
  int errnum = 0;
  const char* msg = gzerror(f, &errnum);
  const std::string error = errnum < 0 ? msg : "";
  gzclose(f);
  if (got < 0 || !error.empty()) throw Error("corrupt or truncated file " + path.string() + ": " + error);
  return out;
}

Affine affine_from_header(const Header& h, const Vec3& spacing) {
  Affine a = Affine::Identity();
  if (h.sform_code > 0) {
    for (int c = 0; c < 4; ++c) {
      a(0, c) = h.srow_x[c];
      a(1, c) = h.srow_y[c];
      a(2, c) = h.srow_z[c];
    }
    return a;
  }
  if (h.qform_code > 0) {
    const double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
    const double aa = std::sqrt(std::max(0.0, 1.0 - (b * b + c * c + d * d)));
    Eigen::Matrix3d r;
    r << aa * aa + b * b - c * c - d * d, 2 * (b * c - aa * d), 2 * (b * d + aa * c),  //
        2 * (b * c + aa * d), aa * aa + c * c - b * b - d * d, 2 * (c * d - aa * b),    //
        2 * (b * d - aa * c), 2 * (c * d + aa * b), aa * aa + d * d - c * c - b * b;
    const double qfac = h.pixdim[0] < 0 ? -1.0 : 1.0;
    r.col(0) *= spacing.x();
    r.col(1) *= spacing.y();
    r.col(2) *= qfac * spacing.z();
    a.topLeftCorner<3, 3>() = r;
    a(0, 3) = h.qoffset_x;
    a(1, 3) = h.qoffset_y;
    a(2, 3) = h.qoffset_z;
    return a;
  }
  a(0, 0) = spacing.x();
  a(1, 1) = spacing.y();
  a(2, 2) = spacing.z();
  return a;
}

}  // namespace

void atomic_write(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void atomic_write(const std::filesystem::path& path, const std::string& text) {
  atomic_write(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

NiftiImage read_nifti(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_all(path);
  if (bytes.size() < sizeof(Header)) throw Error("not a NIfTI-1 file (too short): " + path.string());
  Header h;
  std::memcpy(&h, bytes.data(), sizeof h);
  if (h.sizeof_hdr != 348) throw Error("not a little-endian NIfTI-1 file: " + path.string());
  if (std::memcmp(h.magic, "n+1", 4) != 0) throw Error("not a single-file NIfTI-1 image: " + path.string());
  const int ndim = h.dim[0];
  if (ndim < 1 || ndim > 4) throw Error("unsupported NIfTI dimensionality " + std::to_string(ndim));
  for (int k = 5; k <= ndim; ++k)
    if (h.dim[k] > 1) throw Error("NIfTI images above four dimensions are not supported");

  const auto dim_at = [&](int k) { return k <= ndim && h.dim[k] > 0 ? static_cast<std::int64_t>(h.dim[k]) : 1; };
  const auto pix_at = [&](int k) { return h.pixdim[k] > 0 ? static_cast<double>(h.pixdim[k]) : 1.0; };
  const Dims dims{dim_at(1), dim_at(2), dim_at(3)};
  const Vec3 spacing(pix_at(1), pix_at(2), pix_at(3));

  NiftiImage img;
  img.grid = VoxelGrid3(dims, spacing, affine_from_header(h, spacing));
  img.channels = static_cast<int>(dim_at(4));
  img.datatype = h.datatype;

  const int bpv = bytes_per_voxel(h.datatype);
  const auto offset = static_cast<std::size_t>(h.vox_offset);
  const std::size_t count = dims.count() * static_cast<std::size_t>(img.channels);
  if (offset < sizeof(Header) || bytes.size() < offset + count * static_cast<std::size_t>(bpv))
    throw Error("truncated NIfTI data in " + path.string());
  const bool scaled = h.scl_slope != 0.0f && !(h.scl_slope == 1.0f && h.scl_inter == 0.0f);
  img.data.resize(count);
  const std::uint8_t* p = bytes.data() + offset;
  for (std::size_t i = 0; i < count; ++i, p += bpv) {
    const double v = decode(h.datatype, p);
    img.data[i] = scaled ? v * h.scl_slope + h.scl_inter : v;
  }
  return img;
}

void write_nifti(const std::filesystem::path& path, const VoxelGrid3& grid, int channels,
                 std::span<const double> data, std::int16_t datatype) {
  if (channels < 1) throw Error("NIfTI channel count must be >= 1");
  const Dims& d = grid.dims();
  if (data.size() != grid.size() * static_cast<std::size_t>(channels))
    throw Error("NIfTI data size does not match grid x channels");
  for (std::int64_t n : {d.nx, d.ny, d.nz, static_cast<std::int64_t>(channels)})
    if (n > 32767) throw Error("dimension too large for NIfTI-1");

  Header h{};
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = channels > 1 ? 4 : 3;
  h.dim[1] = static_cast<std::int16_t>(d.nx);
  h.dim[2] = static_cast<std::int16_t>(d.ny);
  h.dim[3] = static_cast<std::int16_t>(d.nz);
  h.dim[4] = static_cast<std::int16_t>(channels);
  for (int k = 5; k < 8; ++k) h.dim[k] = 1;
  h.datatype = datatype;
  const int bpv = bytes_per_voxel(datatype);
  h.bitpix = static_cast<std::int16_t>(8 * bpv);
  h.pixdim[0] = 1.0f;
  h.pixdim[1] = static_cast<float>(grid.spacing().x());
  h.pixdim[2] = static_cast<float>(grid.spacing().y());
  h.pixdim[3] = static_cast<float>(grid.spacing().z());
  h.pixdim[4] = 1.0f;
  h.vox_offset = 352.0f;
  h.scl_slope = 1.0f;
  h.xyzt_units = 2;  // millimetres
  h.sform_code = 1;
  const Affine& a = grid.affine();
  for (int c = 0; c < 4; ++c) {
    h.srow_x[c] = static_cast<float>(a(0, c));
    h.srow_y[c] = static_cast<float>(a(1, c));
    h.srow_z[c] = static_cast<float>(a(2, c));
  }
  std::memcpy(h.magic, "n+1", 4);

  std::vector<std::uint8_t> bytes(352 + data.size() * static_cast<std::size_t>(bpv), 0);
  std::memcpy(bytes.data(), &h, sizeof h);
  std::uint8_t* p = bytes.data() + 352;
  for (double v : data) {
    encode(datatype, p, v);
    p += bpv;
  }

  if (!is_gzip_path(path)) {
    atomic_write(path, bytes);
    return;
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  gzFile f = gzopen(tmp.string().c_str(), "wb6");
  if (!f) throw Error("cannot write " + tmp.string());
  const int wrote = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
  if (gzclose(f) != Z_OK || wrote != static_cast<int>(bytes.size()))
    throw Error("gzip write failed for " + tmp.string());
  std::filesystem::rename(tmp, path);
}

LabelVolume read_labels(const std::filesystem::path& path, const ClassMap& classes, const LabelMapping* mapping) {
  const NiftiImage img = read_nifti(path);
  if (img.channels != 1) throw Error("label volume must be three-dimensional: " + path.string());
  std::vector<ClassId> labels(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double v = img.data[i];
    if (v != std::floor(v)) throw Error("non-integer label value in " + path.string());
    const int raw = static_cast<int>(v);
    if (mapping) {
      const auto it = mapping->find(raw);
      labels[i] = it == mapping->end() ? cls::background : it->second;
    } else {
      if (raw < 0 || raw > 255 || !classes.contains(static_cast<ClassId>(raw)))
        throw Error("label value " + std::to_string(raw) + " in " + path.string() + " is not a registered class");
      labels[i] = static_cast<ClassId>(raw);
    }
  }
  return LabelVolume(img.grid, classes, std::move(labels));
}

void write_labels(const std::filesystem::path& path, const LabelVolume& vol) {
  std::vector<double> data(vol.voxels().begin(), vol.voxels().end());
  write_nifti(path, vol.grid(), 1, data, nifti_type::uint8);
}

LogitField read_logits(const std::filesystem::path& path) {
  NiftiImage img = read_nifti(path);
  if (img.channels < 2) throw Error("logit volume needs at least two channels: " + path.string());
  return LogitField(img.grid, img.channels, std::move(img.data));
}

void write_logits(const std::filesystem::path& path, const ChannelField& field) {
  write_nifti(path, field.grid(), field.channels(), field.values(), nifti_type::float32);
}

}  // namespace tavr::io
