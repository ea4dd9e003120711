#pragma once

// Binary layout (all integers and floats little-endian):
//
//   char[4]  magic "TSTG"
//   u32      version (1)
//   u32      kind: 1 coefficients, 2 reinit tensor, 3 grid trajectory
//   u32      d
//   u32      number of counts n
//   u32[n]   counts (frame: 2d phase-space counts; trajectory: d spatial counts)
//   f64      epsilon
//   u64      rows
//   u64      cols
//   f64[2 * rows * cols]  interleaved (re, im), column after column
//
// Coefficients have cols = 1; a reinit tensor is K x K with entry (k', k) at
// position k * K + k'; a trajectory stores one grid function per column.

#include <string>
#include <vector>

#include "tstg/frame.hpp"
#include "tstg/gwp.hpp"

namespace tstg {

enum class BlobKind : unsigned { coefficients = 1, reinit = 2, trajectory = 3 };

struct BlobHeader {
  unsigned version = 1;
  BlobKind kind = BlobKind::coefficients;
  unsigned dim = 0;
  std::vector<unsigned> counts;
  double epsilon = 0.0;
  unsigned long long rows = 0;
  unsigned long long cols = 0;
};

BlobHeader read_header(const std::string &path);

void save_coefficients(const std::string &path, const CoefficientTensor &c);
// The frame must match the stored dimension, counts and epsilon.
CoefficientTensor load_coefficients(const std::string &path, const FrameSpec &spec);

// Dense layout only; a sparse tensor is expanded on write.
void save_reinit(const std::string &path, const ReinitTensor &t);
ReinitTensor load_reinit(const std::string &path, const FrameSpec &spec);

void save_trajectory(const std::string &path, const std::vector<GridFunction> &frames,
                     double epsilon);
std::vector<GridFunction> load_trajectory(const std::string &path, const SpatialGrid &grid,
                                          double epsilon);

} // namespace tstg
