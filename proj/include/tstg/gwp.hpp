#pragma once

// Semiclassical Gaussian wave packets
//
//   u(x) = (pi eps)^{-d/4} det(Im C)^{1/4}
//          exp[(i/eps)(1/2 (x-q)^T C (x-q) + p^T (x-q))] exp(i S / eps)
//
// with C complex symmetric and Im C positive definite. Everything in this
// header is an immutable value type or a pure function.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "tstg/types.hpp"

namespace tstg {

// Complex symmetric d x d matrix with positive-definite imaginary part.
class SiegelMatrix {
public:
  explicit SiegelMatrix(CMat entries);

  // c * Id_d
  static SiegelMatrix scalar(cplx c, int d = 1);

  int dim() const noexcept { return static_cast<int>(c_.rows()); }
  const CMat &matrix() const noexcept { return c_; }
  CMat conj() const { return c_.conjugate(); }
  RMat imag() const { return c_.imag(); }
  const CMat &inverse() const noexcept { return inv_; }

  // det(Im C)^{1/4}
  double det_imag_quarter() const noexcept { return det_im_quarter_; }

  // Smallest/largest eigenvalues over Im(C) and Im(-C^{-1}) together; these
  // are the theta/Theta constants of the overlap and truncation bounds.
  double theta() const noexcept { return theta_; }
  double big_theta() const noexcept { return big_theta_; }

private:
  CMat c_;
  CMat inv_;
  double det_im_quarter_ = 1.0;
  double theta_ = 0.0;
  double big_theta_ = 0.0;
};

struct PhasePoint {
  RVec q;
  RVec p;

  int dim() const noexcept { return static_cast<int>(q.size()); }
};

PhasePoint phase_point(double q, double p);

class GaussianWavePacket {
public:
  GaussianWavePacket(double epsilon, PhasePoint center, SiegelMatrix width, double action = 0.0);

  int dim() const noexcept { return center_.dim(); }
  double epsilon() const noexcept { return eps_; }
  const PhasePoint &center() const noexcept { return center_; }
  const RVec &q() const noexcept { return center_.q; }
  const RVec &p() const noexcept { return center_.p; }
  const SiegelMatrix &width() const noexcept { return width_; }
  double action() const noexcept { return action_; }

  // (pi eps)^{-d/4} det(Im C)^{1/4}
  double prefactor() const noexcept { return prefactor_; }

  cplx operator()(std::span<const double> x) const;
  cplx operator()(double x) const; // d == 1 only

  GaussianWavePacket with_center(PhasePoint z) const;
  GaussianWavePacket with_action(double s) const;

  // x -> u(-x): center (-q, -p), same width and action.
  GaussianWavePacket mirrored() const;

private:
  double eps_;
  PhasePoint center_;
  SiegelMatrix width_;
  double action_;
  double prefactor_;
};

// Uniform tensor grid. Periodic grids drop the upper endpoint
// (spacing (b-a)/n) and use equal weights; closed grids include both
// endpoints (spacing (b-a)/(n-1)) and use trapezoidal weights.
class SpatialGrid {
public:
  SpatialGrid(std::vector<double> lower, std::vector<double> upper, std::vector<int> counts,
              bool periodic);

  static SpatialGrid periodic(double a, double b, int n) { return {{a}, {b}, {n}, true}; }
  static SpatialGrid closed(double a, double b, int n) { return {{a}, {b}, {n}, false}; }

  int dim() const noexcept { return static_cast<int>(counts_.size()); }
  std::size_t size() const noexcept { return size_; }
  bool is_periodic() const noexcept { return periodic_; }
  const std::vector<double> &lower() const noexcept { return lower_; }
  const std::vector<double> &upper() const noexcept { return upper_; }
  const std::vector<int> &counts() const noexcept { return counts_; }

  double spacing(int axis) const;
  double coordinate(int axis, int i) const;
  // Row-major: the last axis varies fastest.
  void point(std::size_t flat, std::span<double> x) const;
  double weight(std::size_t flat) const;

  bool operator==(const SpatialGrid &o) const;

private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<int> counts_;
  bool periodic_;
  std::size_t size_;
};

struct GridFunction {
  SpatialGrid grid;
  std::vector<cplx> values;

  explicit GridFunction(SpatialGrid g);
  GridFunction(SpatialGrid g, std::vector<cplx> v);

  double norm() const;
  cplx inner(const GridFunction &other) const; // antilinear in *this
};

GridFunction evaluate(const GaussianWavePacket &packet, const SpatialGrid &grid);

// Pair-of-widths precomputation of the analytic overlap
//   <g_{z1}^{C1} | g_{z2}^{C2}> = beta exp((i/2eps) dz^T M dz).
// Everything that depends only on (C1, C2, eps) is computed once, so
// evaluating many center pairs is cheap.
class OverlapKernel {
public:
  OverlapKernel(const SiegelMatrix &bra, const SiegelMatrix &ket, double epsilon);

  cplx operator()(const PhasePoint &z1, const PhasePoint &z2) const;
  // Raw-pointer form for hot loops; each array has length dim().
  cplx eval(const double *q1, const double *p1, const double *q2, const double *p2) const;

  int dim() const noexcept { return d_; }

  // Blocks of M and the constant in front of beta (closed form).
  const CMat &position_block() const noexcept { return mq_; }
  const CMat &momentum_block() const noexcept { return mp_; }
  cplx amplitude() const noexcept { return amp_; }

private:
  int d_;
  double eps_;
  cplx amp_;
  CMat mq_;
  CMat mp_;
  CMat cross_; // B^{-1}(C2 + conj C1)
};

// <g1|g2>, antilinear in g1, including the action phases.
cplx inner_product(const GaussianWavePacket &g1, const GaussianWavePacket &g2);

// sqrt(gamma) exp(-(theta/8eps)|z2-z1|^2) with gamma = (Theta/theta)^d.
double overlap_bound(const GaussianWavePacket &g1, const GaussianWavePacket &g2, double theta,
                     double big_theta);

struct HagedornPair {
  CMat Q;
  CMat P;
};

HagedornPair to_hagedorn(const SiegelMatrix &c);
SiegelMatrix from_hagedorn(const CMat &Q, const CMat &P);

// Residuals max|Q^T P - P^T Q| and max|Q^* P - P^* Q - 2i Id|.
struct SymplecticResidual {
  double transpose_part;
  double adjoint_part;
  double max() const { return transpose_part > adjoint_part ? transpose_part : adjoint_part; }
};
SymplecticResidual symplectic_residual(const CMat &Q, const CMat &P);

// eps-scaled Fourier transform: (2 pi eps)^{-d/2} int u(x) exp(-i xi.x / eps) dx.
GaussianWavePacket fourier_transform(const GaussianWavePacket &packet);

// Random Siegel matrix A + i L L^T with A symmetric in [-1,1] and L lower
// triangular, diagonal in [0.5, 2], off-diagonal in [-0.5, 0.5].
SiegelMatrix random_siegel(std::mt19937_64 &rng, int d);

// ||u - v||_{L2(R^d)} by quadrature on a grid adapted to both packets. Used
// where the difference is far below sqrt(machine eps) and 2 - 2 Re<u|v>
// would cancel.
double packet_l2_distance(const GaussianWavePacket &u, const GaussianWavePacket &v);

} // namespace tstg
