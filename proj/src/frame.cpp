#include "tstg/frame.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tstg/error.hpp"

namespace tstg {

namespace {

constexpr double kPi = std::numbers::pi;

} // namespace

struct FrameSpec::Data {
  double eps;
  SiegelMatrix width;
  PhasePoint center;
  std::vector<double> half;
  std::vector<int> counts;
  std::vector<double> spacing;
  std::size_t size;
  double weight;
  RMat qs;
  RMat ps;
};

FrameSpec::FrameSpec(double epsilon, SiegelMatrix width, PhasePoint center,
                     std::vector<double> half_widths, std::vector<int> counts) {
  const int d = width.dim();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ParameterError("FrameSpec: epsilon must be positive");
  if (center.dim() != d || center.p.size() != d)
    throw ParameterError("FrameSpec: center dimension does not match width");
  if (half_widths.size() != static_cast<std::size_t>(2 * d) ||
      counts.size() != static_cast<std::size_t>(2 * d))
    throw ParameterError("FrameSpec: need 2d half widths and 2d counts");
  std::vector<double> spacing(2 * d);
  std::size_t size = 1;
  double cell = 1.0;
  for (int a = 0; a < 2 * d; ++a) {
    if (!(half_widths[a] > 0.0) || !std::isfinite(half_widths[a]))
      throw ParameterError("FrameSpec: half widths must be positive");
    if (counts[a] < 1)
      throw ParameterError("FrameSpec: counts must be positive");
    spacing[a] = 2.0 * half_widths[a] / counts[a];
    cell *= spacing[a];
    size *= static_cast<std::size_t>(counts[a]);
  }
  const double weight = std::pow(2.0 * kPi * epsilon, -d) * cell;

  RMat qs(d, static_cast<Eigen::Index>(size)), ps(d, static_cast<Eigen::Index>(size));
  for (std::size_t k = 0; k < size; ++k) {
    std::size_t rest = k;
    for (int a = 2 * d - 1; a >= 0; --a) {
      const auto n = static_cast<std::size_t>(counts[a]);
      const auto i = rest % n;
      rest /= n;
      const double c = a < d ? center.q(a) : center.p(a - d);
      const double x = c - half_widths[a] + (static_cast<double>(i) + 0.5) * spacing[a];
      if (a < d)
        qs(a, static_cast<Eigen::Index>(k)) = x;
      else
        ps(a - d, static_cast<Eigen::Index>(k)) = x;
    }
  }
  d_ = std::make_shared<const Data>(Data{epsilon, std::move(width), std::move(center),
                                         std::move(half_widths), std::move(counts),
                                         std::move(spacing), size, weight, std::move(qs),
                                         std::move(ps)});
}

FrameSpec FrameSpec::box1d(double epsilon, cplx width, double bq, double bp, int nq, int np,
                           double q0, double p0) {
  return FrameSpec(epsilon, SiegelMatrix::scalar(width, 1), phase_point(q0, p0), {bq, bp},
                   {nq, np});
}

int FrameSpec::dim() const noexcept { return d_->width.dim(); }
double FrameSpec::epsilon() const noexcept { return d_->eps; }
const SiegelMatrix &FrameSpec::width() const noexcept { return d_->width; }
const PhasePoint &FrameSpec::center() const noexcept { return d_->center; }
const std::vector<double> &FrameSpec::half_widths() const noexcept { return d_->half; }
const std::vector<int> &FrameSpec::counts() const noexcept { return d_->counts; }
std::size_t FrameSpec::size() const noexcept { return d_->size; }
double FrameSpec::weight() const noexcept { return d_->weight; }
double FrameSpec::spacing(int axis) const { return d_->spacing.at(axis); }
const RMat &FrameSpec::q_points() const noexcept { return d_->qs; }
const RMat &FrameSpec::p_points() const noexcept { return d_->ps; }

PhasePoint FrameSpec::point(std::size_t k) const {
  const auto c = static_cast<Eigen::Index>(k);
  return {d_->qs.col(c), d_->ps.col(c)};
}

GaussianWavePacket FrameSpec::basis(std::size_t k) const {
  return GaussianWavePacket(d_->eps, point(k), d_->width);
}

std::vector<double> FrameSpec::position_lower() const {
  std::vector<double> out(dim());
  for (int a = 0; a < dim(); ++a)
    out[a] = d_->center.q(a) - d_->half[a];
  return out;
}

std::vector<double> FrameSpec::position_upper() const {
  std::vector<double> out(dim());
  for (int a = 0; a < dim(); ++a)
    out[a] = d_->center.q(a) + d_->half[a];
  return out;
}

bool FrameSpec::operator==(const FrameSpec &o) const {
  if (d_ == o.d_)
    return true;
  return d_->eps == o.d_->eps && d_->width.matrix() == o.d_->width.matrix() &&
         d_->center.q == o.d_->center.q && d_->center.p == o.d_->center.p &&
         d_->half == o.d_->half && d_->counts == o.d_->counts;
}

std::vector<PhasePoint> grid_points(const FrameSpec &spec) {
  std::vector<PhasePoint> out;
  out.reserve(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k)
    out.push_back(spec.point(k));
  return out;
}

// ---------------------------------------------------------------------------

CoefficientTensor::CoefficientTensor(FrameSpec s)
    : spec(std::move(s)), values(CVec::Zero(static_cast<Eigen::Index>(spec.size()))) {}

CoefficientTensor::CoefficientTensor(FrameSpec s, CVec v) : spec(std::move(s)), values(std::move(v)) {
  if (static_cast<std::size_t>(values.size()) != spec.size())
    throw ParameterError("CoefficientTensor: length does not match frame size");
}

ReinitTensor::ReinitTensor(FrameSpec spec, Dense entries)
    : spec_(std::move(spec)), sparse_mode_(false), dense_(std::move(entries)) {
  const auto k = static_cast<Eigen::Index>(spec_.size());
  if (dense_.rows() != k || dense_.cols() != k)
    throw ParameterError("ReinitTensor: shape must be K x K");
}

ReinitTensor::ReinitTensor(FrameSpec spec, Sparse entries)
    : spec_(std::move(spec)), sparse_mode_(true), sparse_(std::move(entries)) {
  const auto k = static_cast<Eigen::Index>(spec_.size());
  if (sparse_.rows() != k || sparse_.cols() != k)
    throw ParameterError("ReinitTensor: shape must be K x K");
  sparse_.makeCompressed();
}

std::size_t ReinitTensor::stored_entries() const {
  return sparse_mode_ ? static_cast<std::size_t>(sparse_.nonZeros())
                      : static_cast<std::size_t>(dense_.size());
}

const ReinitTensor::Dense &ReinitTensor::dense() const {
  if (sparse_mode_)
    throw UnsupportedError("ReinitTensor: tensor is stored sparse");
  return dense_;
}

const ReinitTensor::Sparse &ReinitTensor::sparse() const {
  if (!sparse_mode_)
    throw UnsupportedError("ReinitTensor: tensor is stored dense");
  return sparse_;
}

cplx ReinitTensor::entry(std::size_t row, std::size_t col) const {
  const auto r = static_cast<Eigen::Index>(row), c = static_cast<Eigen::Index>(col);
  return sparse_mode_ ? sparse_.coeff(r, c) : dense_(r, c);
}

CVec ReinitTensor::column(std::size_t k) const {
  const auto c = static_cast<Eigen::Index>(k);
  if (!sparse_mode_)
    return dense_.col(c);
  CVec out = CVec::Zero(sparse_.rows());
  for (Eigen::Index r = 0; r < sparse_.outerSize(); ++r)
    out(r) = sparse_.coeff(r, c);
  return out;
}

CVec ReinitTensor::multiply(const CVec &c) const {
  const auto n = static_cast<Eigen::Index>(spec_.size());
  if (c.size() != n)
    throw ParameterError("ReinitTensor: vector length does not match");
  CVec out(n);
  // One row per iteration, accumulated in index order: bit-identical results
  // for any thread count.
  if (!sparse_mode_) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < n; ++r) {
      const cplx *row = dense_.data() + r * n;
      cplx s{0.0, 0.0};
      for (Eigen::Index k = 0; k < n; ++k)
        s += row[k] * c(k);
      out(r) = s;
    }
  } else {
#pragma omp parallel for schedule(dynamic, 64)
    for (Eigen::Index r = 0; r < n; ++r) {
      cplx s{0.0, 0.0};
      for (Sparse::InnerIterator it(sparse_, r); it; ++it)
        s += it.value() * c(it.col());
      out(r) = s;
    }
  }
  return out;
}

double ReinitTensor::max_column_sum() const {
  const auto n = static_cast<Eigen::Index>(spec_.size());
  RVec sums = RVec::Zero(n);
  if (!sparse_mode_) {
    for (Eigen::Index r = 0; r < n; ++r)
      sums += dense_.row(r).cwiseAbs().transpose();
  } else {
    for (Eigen::Index r = 0; r < n; ++r)
      for (Sparse::InnerIterator it(sparse_, r); it; ++it)
        sums(it.col()) += std::abs(it.value());
  }
  return n ? sums.maxCoeff() : 0.0;
}

// ---------------------------------------------------------------------------

CoefficientTensor analyze(const FrameSpec &spec, const GaussianWavePacket &psi) {
  if (psi.dim() != spec.dim())
    throw ParameterError("analyze: dimension mismatch");
  if (std::abs(psi.epsilon() - spec.epsilon()) > 1e-14 * spec.epsilon())
    throw ParameterError("analyze: epsilon mismatch");
  const OverlapKernel kernel(spec.width(), psi.width(), spec.epsilon());
  const cplx phase = spec.weight() * std::exp(I * (psi.action() / spec.epsilon()));
  const auto n = static_cast<Eigen::Index>(spec.size());
  const RMat &qs = spec.q_points();
  const RMat &ps = spec.p_points();
  CVec out(n);
#pragma omp parallel for schedule(static) if (n > 1024)
  for (Eigen::Index k = 0; k < n; ++k)
    out(k) = phase * kernel.eval(qs.col(k).data(), ps.col(k).data(), psi.q().data(),
                                 psi.p().data());
  return CoefficientTensor(spec, std::move(out));
}

namespace {

// Basis packet g_k at x without constructing a GaussianWavePacket.
struct BasisEvaluator {
  const FrameSpec &spec;
  double pref;
  cplx inv_eps;

  explicit BasisEvaluator(const FrameSpec &s)
      : spec(s), pref(std::pow(kPi * s.epsilon(), -0.25 * s.dim()) * s.width().det_imag_quarter()),
        inv_eps(I / s.epsilon()) {}

  cplx operator()(std::size_t k, const double *x) const {
    const int d = spec.dim();
    const auto c = static_cast<Eigen::Index>(k);
    const CMat &w = spec.width().matrix();
    cplx quad{0.0, 0.0};
    double lin = 0.0;
    for (int i = 0; i < d; ++i) {
      const double yi = x[i] - spec.q_points()(i, c);
      lin += spec.p_points()(i, c) * yi;
      cplx row = w(i, i) * (0.5 * yi);
      for (int j = 0; j < i; ++j)
        row += w(i, j) * (x[j] - spec.q_points()(j, c));
      quad += row * yi;
    }
    return pref * std::exp(inv_eps * (quad + lin));
  }
};

void check_grid(const FrameSpec &spec, const SpatialGrid &grid, const char *what) {
  if (grid.dim() != spec.dim())
    throw ParameterError(std::string(what) + ": grid dimension does not match frame");
  if (grid.dim() > 8)
    throw UnsupportedError(std::string(what) + ": d > 8");
}

} // namespace

GridFunction synthesize(const FrameSpec &spec, const CoefficientTensor &coeffs,
                        const SpatialGrid &grid) {
  if (!(coeffs.spec == spec))
    throw ParameterError("synthesize: coefficients belong to a different frame");
  check_grid(spec, grid, "synthesize");
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < spec.size(); ++k)
    if (coeffs.values(static_cast<Eigen::Index>(k)) != cplx{0.0, 0.0})
      active.push_back(k);
  const BasisEvaluator g(spec);
  GridFunction out(grid);
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double x[8];
    grid.point(static_cast<std::size_t>(i), std::span<double>(x, grid.dim()));
    cplx s{0.0, 0.0};
    for (std::size_t k : active)
      s += coeffs.values(static_cast<Eigen::Index>(k)) * g(k, x);
    out.values[i] = s;
  }
  return out;
}

CMat synthesis_matrix(const FrameSpec &spec, const SpatialGrid &grid) {
  check_grid(spec, grid, "synthesis_matrix");
  const BasisEvaluator g(spec);
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto kk = static_cast<Eigen::Index>(spec.size());
  CMat out(n, kk);
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < kk; ++k) {
    double x[8];
    for (Eigen::Index i = 0; i < n; ++i) {
      grid.point(static_cast<std::size_t>(i), std::span<double>(x, grid.dim()));
      out(i, k) = g(static_cast<std::size_t>(k), x);
    }
  }
  return out;
}

ReconstructionErrors reconstruction_errors(const FrameSpec &spec, const GaussianWavePacket &psi,
                                          const SpatialGrid &grid) {
  const auto exact = evaluate(psi, grid);
  const auto approx = synthesize(spec, analyze(spec, psi), grid);
  double sup = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double e = std::abs(exact.values[i] - approx.values[i]);
    sup = std::max(sup, e);
    l2 += grid.weight(i) * e * e;
  }
  return {sup, std::sqrt(l2)};
}

double reconstruction_error(const FrameSpec &spec, const GaussianWavePacket &psi,
                            const SpatialGrid &grid, Norm norm) {
  const auto e = reconstruction_errors(spec, psi, grid);
  return norm == Norm::sup ? e.sup : e.l2;
}

double truncation_bound(double b, double theta, double big_theta, double epsilon, int d) {
  if (!(b >= 0.0) || !(theta > 0.0) || !(big_theta >= theta) || !(epsilon > 0.0) || d < 1)
    throw ParameterError("truncation_bound: need b >= 0, 0 < theta <= Theta, eps > 0, d >= 1");
  const double c =
      std::pow(8.0 * epsilon * std::pow(kPi * big_theta, 0.75) * std::pow(theta, -1.5), d);
  return c * std::exp(-theta * d / (4.0 * epsilon) * b * b);
}

ReinitTensor reinit_tensor(const FrameSpec &spec, const std::vector<GaussianWavePacket> &propagated,
                           double drop_tolerance) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  if (propagated.size() != spec.size())
    throw ParameterError("reinit_tensor: need exactly one propagated packet per grid point");
  for (const auto &u : propagated)
    if (u.dim() != spec.dim() || std::abs(u.epsilon() - spec.epsilon()) > 1e-14 * spec.epsilon())
      throw ParameterError("reinit_tensor: propagated packet does not match the frame");
  const RMat &qs = spec.q_points();
  const RMat &ps = spec.p_points();
  const double w = spec.weight();
  const double eps = spec.epsilon();

  if (drop_tolerance <= 0.0) {
    ReinitTensor::Dense t(n, n);
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto &u = propagated[static_cast<std::size_t>(k)];
      const OverlapKernel kernel(spec.width(), u.width(), eps);
      const cplx phase = w * std::exp(I * (u.action() / eps));
      for (Eigen::Index r = 0; r < n; ++r)
        t(r, k) = phase * kernel.eval(qs.col(r).data(), ps.col(r).data(), u.q().data(),
                                      u.p().data());
    }
    return ReinitTensor(spec, std::move(t));
  }

  using Triplet = Eigen::Triplet<cplx, Eigen::Index>;
  std::vector<std::vector<Triplet>> cols(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto &u = propagated[static_cast<std::size_t>(k)];
    const OverlapKernel kernel(spec.width(), u.width(), eps);
    const cplx phase = w * std::exp(I * (u.action() / eps));
    auto &out = cols[static_cast<std::size_t>(k)];
    for (Eigen::Index r = 0; r < n; ++r) {
      const cplx v =
          phase * kernel.eval(qs.col(r).data(), ps.col(r).data(), u.q().data(), u.p().data());
      if (std::abs(v) > drop_tolerance)
        out.emplace_back(r, k, v);
    }
  }
  std::size_t nnz = 0;
  for (const auto &c : cols)
    nnz += c.size();
  std::vector<Triplet> all;
  all.reserve(nnz);
  for (auto &c : cols) {
    all.insert(all.end(), c.begin(), c.end());
    std::vector<Triplet>().swap(c);
  }
  ReinitTensor::Sparse t(n, n);
  t.setFromTriplets(all.begin(), all.end());
  return ReinitTensor(spec, std::move(t));
}

CoefficientTensor reinit_apply(const ReinitTensor &tensor, const CoefficientTensor &coeffs) {
  if (!(tensor.spec() == coeffs.spec))
    throw ParameterError("reinit_apply: tensor and coefficients belong to different frames");
  return CoefficientTensor(tensor.spec(), tensor.multiply(coeffs.values));
}

std::vector<double> reexpansion_errors(const ReinitTensor &tensor,
                                       const std::vector<GaussianWavePacket> &propagated,
                                       const SpatialGrid &grid) {
  const FrameSpec &spec = tensor.spec();
  if (propagated.size() != spec.size())
    throw ParameterError("reexpansion_errors: need one propagated packet per grid point");
  const CMat g = synthesis_matrix(spec, grid);
  CMat r;
  if (tensor.is_sparse())
    r = g * tensor.sparse();
  else
    r = g * tensor.dense();
  const auto n = static_cast<Eigen::Index>(spec.size());
  std::vector<double> out(spec.size());
  std::vector<double> weights(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    weights[i] = grid.weight(i);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto uk = evaluate(propagated[static_cast<std::size_t>(k)], grid);
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      s += weights[i] * std::norm(uk.values[i] - r(static_cast<Eigen::Index>(i), k));
    out[static_cast<std::size_t>(k)] = std::sqrt(s);
  }
  return out;
}

AdjointPair adjoint_pairing(const FrameSpec &spec, const CoefficientTensor &coeffs,
                            const GaussianWavePacket &psi, const SpatialGrid &grid) {
  const auto lhs = synthesize(spec, coeffs, grid).inner(evaluate(psi, grid));
  const auto a = analyze(spec, psi);
  const cplx rhs = coeffs.values.dot(a.values) / spec.weight();
  return {lhs, rhs};
}

AdjointPair adjoint_pairing(const FrameSpec &spec, const CoefficientTensor &coeffs,
                            const GridFunction &psi_grid) {
  const SpatialGrid &grid = psi_grid.grid;
  const auto lhs = synthesize(spec, coeffs, grid).inner(psi_grid);
  const CMat g = synthesis_matrix(spec, grid);
  CVec wpsi(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    wpsi(static_cast<Eigen::Index>(i)) = grid.weight(i) * psi_grid.values[i];
  // c_k(psi) / w = <g_k|psi>
  const CVec overlaps = g.adjoint() * wpsi;
  return {lhs, coeffs.values.dot(overlaps)};
}

double riemann_error_probe(const std::function<double(std::span<const double>)> &f, int k, int d,
                           double exact) {
  if (k < 1 || d < 1)
    throw ParameterError("riemann_error_probe: need k >= 1 and d >= 1");
  const int dims = 2 * d;
  std::size_t total = 1;
  for (int a = 0; a < dims; ++a)
    total *= static_cast<std::size_t>(k);
  std::vector<double> z(dims);
  double s = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int a = dims - 1; a >= 0; --a) {
      z[a] = (static_cast<double>(rest % k) + 0.5) / k;
      rest /= k;
    }
    s += f(z);
  }
  return std::abs(s / static_cast<double>(total) - exact);
}

double discrete_gaussian_convolution(double sigma1, double sigma2, double h, double offset,
                                     double s) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || !(h > 0.0))
    throw ParameterError("discrete_gaussian_convolution: sigmas and h must be positive");
  const double sigma3 = sigma1 * sigma2 / (sigma1 + sigma2);
  const double center = sigma1 * s / (sigma1 + sigma2);
  const double reach = 40.0 * std::sqrt(sigma3) + h;
  const auto k0 = static_cast<long long>(std::floor((center - reach - offset) / h));
  const auto k1 = static_cast<long long>(std::ceil((center + reach - offset) / h));
  double sum = 0.0;
  for (long long k = k0; k <= k1; ++k) {
    const double t = offset + static_cast<double>(k) * h;
    sum += std::exp(-t * t / (2.0 * sigma1)) * std::exp(-(s - t) * (s - t) / (2.0 * sigma2));
  }
  return sum;
}

double convolution_bound_constant(double sigma1, double sigma2, double h) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || !(h > 0.0))
    throw ParameterError("convolution_bound_constant: sigmas and h must be positive");
  const double sigma3 = sigma1 * sigma2 / (sigma1 + sigma2);
  return 1.0 + std::sqrt(2.0 * kPi * sigma3) / h;
}

} // namespace tstg
