#include "doctest.h"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "tstg/error.hpp"
#include "tstg/serialize.hpp"

using namespace tstg;

namespace {

std::string tmp(const std::string &name) {
  return (std::filesystem::temp_directory_path() / ("tstg_test_" + name)).string();
}

std::vector<unsigned char> bytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

template <class T>
T read_le(const std::vector<unsigned char> &b, std::size_t at) {
  T v{};
  std::memcpy(&v, b.data() + at, sizeof(T));
  return v;
}

} // namespace

TEST_CASE("coefficient blob layout") {
  const auto f = FrameSpec::box1d(0.5, {0.0, 2.0}, 3.0, 4.0, 3, 2);
  CVec v(6);
  for (int k = 0; k < 6; ++k)
    v(k) = {1.0 + k, -0.5 * k};
  const auto path = tmp("coeffs.bin");
  save_coefficients(path, CoefficientTensor(f, v));

  const auto b = bytes(path);
  // 4 + 4*4 + 2*4 counts + 8 + 16 header bytes, 6 complex values
  REQUIRE(b.size() == 4 + 16 + 8 + 8 + 16 + 96);
  CHECK(std::memcmp(b.data(), "TSTG", 4) == 0);
  CHECK(read_le<std::uint32_t>(b, 4) == 1);
  CHECK(read_le<std::uint32_t>(b, 8) == 1);
  CHECK(read_le<std::uint32_t>(b, 12) == 1);
  CHECK(read_le<std::uint32_t>(b, 16) == 2);
  CHECK(read_le<std::uint32_t>(b, 20) == 3);
  CHECK(read_le<std::uint32_t>(b, 24) == 2);
  CHECK(read_le<double>(b, 28) == 0.5);
  CHECK(read_le<std::uint64_t>(b, 36) == 6);
  CHECK(read_le<std::uint64_t>(b, 44) == 1);
  CHECK(read_le<double>(b, 52) == 1.0);
  CHECK(read_le<double>(b, 60) == 0.0);
  CHECK(read_le<double>(b, 52 + 16 * 5) == 6.0);
  CHECK(read_le<double>(b, 60 + 16 * 5) == -2.5);

  const auto h = read_header(path);
  CHECK(h.kind == BlobKind::coefficients);
  CHECK(h.dim == 1);
  CHECK(h.counts == std::vector<unsigned>{3, 2});
  CHECK(h.rows == 6);
  CHECK(h.cols == 1);

  const auto back = load_coefficients(path, f);
  CHECK(back.values == v);

  CHECK_THROWS_AS(load_coefficients(path, FrameSpec::box1d(0.5, {0.0, 2.0}, 3.0, 4.0, 2, 3)), IoError);
  CHECK_THROWS_AS(load_coefficients(path, FrameSpec::box1d(0.4, {0.0, 2.0}, 3.0, 4.0, 3, 2)), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("reinit tensor blobs") {
  const auto f = FrameSpec::box1d(1.0, I, 2.0, 2.0, 2, 2);
  ReinitTensor::Dense d(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      d(r, c) = {r + 10.0 * c, r == c ? 1.0 : 0.0};
  const ReinitTensor t(f, d);
  const auto path = tmp("reinit.bin");
  save_reinit(path, t);
  const auto b = bytes(path);
  // entry (k', k) sits at position k * K + k'
  const std::size_t payload = 4 + 16 + 8 + 8 + 16;
  CHECK(read_le<double>(b, payload + 16 * (2 * 4 + 1)) == 1.0 + 20.0);
  const auto back = load_reinit(path, f);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      CHECK(back.entry(r, c) == t.entry(r, c));

  // sparse tensors are stored densely
  const ReinitTensor s(f, ReinitTensor::Sparse(d.sparseView()));
  save_reinit(path, s);
  const auto sb = load_reinit(path, f);
  CHECK_FALSE(sb.is_sparse());
  CHECK(sb.entry(3, 2) == s.entry(3, 2));
  CHECK_THROWS_AS(load_coefficients(path, f), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("trajectory blobs") {
  const auto g = SpatialGrid::periodic(-1, 1, 8);
  std::vector<GridFunction> frames;
  for (int f = 0; f < 3; ++f) {
    GridFunction u(g);
    for (std::size_t i = 0; i < 8; ++i)
      u.values[i] = {f + 0.1 * i, -1.0 * f};
    frames.push_back(u);
  }
  const auto path = tmp("traj.bin");
  save_trajectory(path, frames, 0.25);
  const auto h = read_header(path);
  CHECK(h.kind == BlobKind::trajectory);
  CHECK(h.counts == std::vector<unsigned>{8});
  CHECK(h.rows == 8);
  CHECK(h.cols == 3);
  const auto back = load_trajectory(path, g, 0.25);
  REQUIRE(back.size() == 3);
  for (int f = 0; f < 3; ++f)
    CHECK(back[f].values == frames[f].values);
  CHECK_THROWS_AS(load_trajectory(path, SpatialGrid::periodic(-1, 1, 16), 0.25), IoError);
  CHECK_THROWS_AS(save_trajectory(path, {}, 0.25), ParameterError);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt files") {
  const auto path = tmp("bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE and some more bytes to read";
  }
  CHECK_THROWS_AS(read_header(path), IoError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "TSTG";
  }
  CHECK_THROWS_AS(read_header(path), IoError);
  const auto f = FrameSpec::box1d(1.0, I, 2.0, 2.0, 2, 2);
  save_coefficients(path, CoefficientTensor(f));
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  CHECK_THROWS_AS(load_coefficients(path, f), IoError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_header(path), IoError);
  CHECK_THROWS_AS(save_coefficients("/nonexistent/dir/x.bin", CoefficientTensor(f)), IoError);
}
