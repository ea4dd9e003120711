#include "tstg/serialize.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "tstg/error.hpp"

namespace tstg {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'T', 'G'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
  explicit Writer(const std::string &path) : path_(path), out_(path, std::ios::binary) {
    if (!out_)
      throw IoError("cannot open '" + path + "' for writing");
  }

  void bytes(const void *p, std::size_t n) { out_.write(static_cast<const char *>(p), n); }

  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i)
      b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }

  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i)
      b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void finish() {
    out_.flush();
    if (!out_)
      throw IoError("write to '" + path_ + "' failed");
  }

private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
public:
  explicit Reader(const std::string &path) : path_(path), in_(path, std::ios::binary) {
    if (!in_)
      throw IoError("cannot open '" + path + "' for reading");
  }

  void bytes(void *p, std::size_t n) {
    in_.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
    if (!in_)
      throw IoError("'" + path_ + "': unexpected end of file");
  }

  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | b[i];
    return v;
  }

  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
      v = (v << 8) | b[i];
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  const std::string &path() const { return path_; }

private:
  std::string path_;
  std::ifstream in_;
};

void write_header(Writer &w, const BlobHeader &h) {
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(h.kind));
  w.u32(h.dim);
  w.u32(static_cast<std::uint32_t>(h.counts.size()));
  for (unsigned c : h.counts)
    w.u32(c);
  w.f64(h.epsilon);
  w.u64(h.rows);
  w.u64(h.cols);
}

BlobHeader parse_header(Reader &r) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("'" + r.path() + "': bad magic");
  BlobHeader h;
  h.version = r.u32();
  if (h.version != kVersion)
    throw IoError("'" + r.path() + "': unsupported version " + std::to_string(h.version));
  const auto kind = r.u32();
  if (kind < 1 || kind > 3)
    throw IoError("'" + r.path() + "': unknown payload kind");
  h.kind = static_cast<BlobKind>(kind);
  h.dim = r.u32();
  const auto n = r.u32();
  if (n > 64)
    throw IoError("'" + r.path() + "': implausible count list");
  for (std::uint32_t i = 0; i < n; ++i)
    h.counts.push_back(r.u32());
  h.epsilon = r.f64();
  h.rows = r.u64();
  h.cols = r.u64();
  return h;
}

void check_header(const BlobHeader &h, BlobKind kind, unsigned dim,
                  const std::vector<unsigned> &counts, double eps, const std::string &path) {
  if (h.kind != kind)
    throw IoError("'" + path + "': payload kind does not match");
  if (h.dim != dim || h.counts != counts)
    throw IoError("'" + path + "': dimension or counts do not match");
  if (std::abs(h.epsilon - eps) > 1e-14 * eps)
    throw IoError("'" + path + "': epsilon does not match");
}

std::vector<unsigned> frame_counts(const FrameSpec &spec) {
  return {spec.counts().begin(), spec.counts().end()};
}

void write_values(Writer &w, const cplx *v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    w.f64(v[i].real());
    w.f64(v[i].imag());
  }
}

void read_values(Reader &r, cplx *v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = r.f64();
    const double im = r.f64();
    v[i] = {re, im};
  }
}

} // namespace

BlobHeader read_header(const std::string &path) {
  Reader r(path);
  return parse_header(r);
}

void save_coefficients(const std::string &path, const CoefficientTensor &c) {
  Writer w(path);
  const auto k = static_cast<unsigned long long>(c.values.size());
  write_header(w, {kVersion, BlobKind::coefficients, static_cast<unsigned>(c.spec.dim()),
                   frame_counts(c.spec), c.spec.epsilon(), k, 1});
  write_values(w, c.values.data(), c.values.size());
  w.finish();
}

CoefficientTensor load_coefficients(const std::string &path, const FrameSpec &spec) {
  Reader r(path);
  const auto h = parse_header(r);
  check_header(h, BlobKind::coefficients, static_cast<unsigned>(spec.dim()), frame_counts(spec),
               spec.epsilon(), path);
  if (h.rows != spec.size() || h.cols != 1)
    throw IoError("'" + path + "': shape does not match the frame");
  CVec v(static_cast<Eigen::Index>(h.rows));
  read_values(r, v.data(), v.size());
  return CoefficientTensor(spec, std::move(v));
}

void save_reinit(const std::string &path, const ReinitTensor &t) {
  const FrameSpec &spec = t.spec();
  const auto k = static_cast<unsigned long long>(spec.size());
  Writer w(path);
  write_header(w, {kVersion, BlobKind::reinit, static_cast<unsigned>(spec.dim()),
                   frame_counts(spec), spec.epsilon(), k, k});
  for (std::size_t col = 0; col < spec.size(); ++col) {
    const CVec c = t.column(col);
    write_values(w, c.data(), c.size());
  }
  w.finish();
}

ReinitTensor load_reinit(const std::string &path, const FrameSpec &spec) {
  Reader r(path);
  const auto h = parse_header(r);
  check_header(h, BlobKind::reinit, static_cast<unsigned>(spec.dim()), frame_counts(spec),
               spec.epsilon(), path);
  if (h.rows != spec.size() || h.cols != spec.size())
    throw IoError("'" + path + "': shape does not match the frame");
  const auto n = static_cast<Eigen::Index>(h.rows);
  ReinitTensor::Dense t(n, n);
  CVec col(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    read_values(r, col.data(), col.size());
    t.col(k) = col;
  }
  return ReinitTensor(spec, std::move(t));
}

void save_trajectory(const std::string &path, const std::vector<GridFunction> &frames,
                     double epsilon) {
  if (frames.empty())
    throw ParameterError("save_trajectory: no frames");
  const SpatialGrid &g = frames.front().grid;
  std::vector<unsigned> counts(g.counts().begin(), g.counts().end());
  Writer w(path);
  write_header(w, {kVersion, BlobKind::trajectory, static_cast<unsigned>(g.dim()), counts,
                   epsilon, g.size(), frames.size()});
  for (const auto &f : frames) {
    if (!(f.grid == g))
      throw ParameterError("save_trajectory: frames on different grids");
    write_values(w, f.values.data(), f.values.size());
  }
  w.finish();
}

std::vector<GridFunction> load_trajectory(const std::string &path, const SpatialGrid &grid,
                                          double epsilon) {
  Reader r(path);
  const auto h = parse_header(r);
  std::vector<unsigned> counts(grid.counts().begin(), grid.counts().end());
  check_header(h, BlobKind::trajectory, static_cast<unsigned>(grid.dim()), counts, epsilon, path);
  if (h.rows != grid.size())
    throw IoError("'" + path + "': frame length does not match the grid");
  std::vector<GridFunction> out;
  out.reserve(h.cols);
  for (unsigned long long c = 0; c < h.cols; ++c) {
    GridFunction f(grid);
    read_values(r, f.values.data(), f.values.size());
    out.push_back(std::move(f));
  }
  return out;
}

} // namespace tstg
