#pragma once

// Phase-space quadrature frame: a uniform midpoint grid z_k in a box B with
// constant weight w = (2 pi eps)^{-d} prod_j dq_j dp_j, the analysis map
// c_k = w <g_k|psi>, the synthesis map sum_k c_k g_k, and the
// re-initialization tensor built from propagated basis packets.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "tstg/gwp.hpp"

namespace tstg {

class FrameSpec {
public:
  // center: box center z0; half_widths/counts: 2d entries ordered
  // (q_1..q_d, p_1..p_d).
  FrameSpec(double epsilon, SiegelMatrix width, PhasePoint center,
            std::vector<double> half_widths, std::vector<int> counts);

  // d = 1 box [q0-bq, q0+bq] x [p0-bp, p0+bp].
  static FrameSpec box1d(double epsilon, cplx width, double bq, double bp, int nq, int np,
                         double q0 = 0.0, double p0 = 0.0);

  int dim() const noexcept;
  double epsilon() const noexcept;
  const SiegelMatrix &width() const noexcept;
  const PhasePoint &center() const noexcept;
  const std::vector<double> &half_widths() const noexcept;
  const std::vector<int> &counts() const noexcept;
  std::size_t size() const noexcept;
  double weight() const noexcept;
  double spacing(int axis) const;

  // Coordinates of grid point k; columns of d x K matrices.
  const RMat &q_points() const noexcept;
  const RMat &p_points() const noexcept;
  PhasePoint point(std::size_t k) const;
  GaussianWavePacket basis(std::size_t k) const;

  // Projection of the box onto position space.
  std::vector<double> position_lower() const;
  std::vector<double> position_upper() const;

  // Same underlying parameters (cheap identity check first).
  bool operator==(const FrameSpec &o) const;

private:
  struct Data;
  std::shared_ptr<const Data> d_;
};

std::vector<PhasePoint> grid_points(const FrameSpec &spec);

struct CoefficientTensor {
  FrameSpec spec;
  CVec values;

  explicit CoefficientTensor(FrameSpec s);
  CoefficientTensor(FrameSpec s, CVec v);

  double l1_norm() const { return values.cwiseAbs().sum(); }
  double max_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

// Square tensor with entry (k', k) = w <g_{k'} | u_k>. Stored dense, or as a
// row-compressed sparse matrix keeping entries with |value| > drop_tolerance.
class ReinitTensor {
public:
  using Dense = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Sparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

  ReinitTensor(FrameSpec spec, Dense entries);
  ReinitTensor(FrameSpec spec, Sparse entries);

  const FrameSpec &spec() const noexcept { return spec_; }
  bool is_sparse() const noexcept { return sparse_mode_; }
  std::size_t size() const noexcept { return spec_.size(); }
  std::size_t stored_entries() const;

  const Dense &dense() const; // throws if sparse
  const Sparse &sparse() const; // throws if dense
  cplx entry(std::size_t row, std::size_t col) const;

  CVec column(std::size_t k) const;
  CVec multiply(const CVec &c) const;
  // max_k sum_{k'} |T_{k',k}|
  double max_column_sum() const;

private:
  FrameSpec spec_;
  bool sparse_mode_;
  Dense dense_;
  Sparse sparse_;
};

CoefficientTensor analyze(const FrameSpec &spec, const GaussianWavePacket &psi);

GridFunction synthesize(const FrameSpec &spec, const CoefficientTensor &coeffs,
                        const SpatialGrid &grid);

// Matrix G with G(i, k) = g_k(x_i); synthesize(c) == G c.
CMat synthesis_matrix(const FrameSpec &spec, const SpatialGrid &grid);

enum class Norm { sup, l2 };

double reconstruction_error(const FrameSpec &spec, const GaussianWavePacket &psi,
                            const SpatialGrid &grid, Norm norm);

struct ReconstructionErrors {
  double sup;
  double l2;
};

// Both norms from one synthesis.
ReconstructionErrors reconstruction_errors(const FrameSpec &spec, const GaussianWavePacket &psi,
                                          const SpatialGrid &grid);

// c exp(-(theta d / 4 eps) b^2), c = (8 eps (pi Theta)^{3/4} theta^{-3/2})^d.
double truncation_bound(double b, double theta, double big_theta, double epsilon, int d);

// drop_tolerance <= 0 gives a dense tensor.
ReinitTensor reinit_tensor(const FrameSpec &spec, const std::vector<GaussianWavePacket> &propagated,
                           double drop_tolerance = 0.0);

// out_k = sum_{k'} T_{k,k'} c_{k'}
CoefficientTensor reinit_apply(const ReinitTensor &tensor, const CoefficientTensor &coeffs);

// L2 norms over the grid of u_k - S(T e_k) for every column k.
std::vector<double> reexpansion_errors(const ReinitTensor &tensor,
                                       const std::vector<GaussianWavePacket> &propagated,
                                       const SpatialGrid &grid);

struct AdjointPair {
  cplx synthesis_side; // <S c | psi> by grid quadrature
  cplx analysis_side;  // sum conj(c_k) c_k(psi) / w
};

// Analysis side analytic.
AdjointPair adjoint_pairing(const FrameSpec &spec, const CoefficientTensor &coeffs,
                            const GaussianWavePacket &psi, const SpatialGrid &grid);
// Analysis side by grid quadrature of <g_k|psi>.
AdjointPair adjoint_pairing(const FrameSpec &spec, const CoefficientTensor &coeffs,
                            const GridFunction &psi_grid);

// |midpoint sum - exact| for k^{2d} samples of f on the unit cube [0,1]^{2d}.
double riemann_error_probe(const std::function<double(std::span<const double>)> &f, int k, int d,
                           double exact);

// sum_k f_{s1}(t_k) f_{s2}(s - t_k) over the grid t_k = offset + k h (all k in Z),
// f_sigma(t) = exp(-t^2 / (2 sigma)).
double discrete_gaussian_convolution(double sigma1, double sigma2, double h, double offset,
                                     double s);
// 1 + sqrt(2 pi sigma3) / h, sigma3 = sigma1 sigma2 / (sigma1 + sigma2).
double convolution_bound_constant(double sigma1, double sigma2, double h);

} // namespace tstg
