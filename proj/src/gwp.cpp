#include "tstg/gwp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tstg/error.hpp"
#include "tstg/linalg.hpp"

namespace tstg {

namespace {

constexpr double kPi = std::numbers::pi;

double symmetry_tolerance(const CMat &c) {
  return 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff());
}

} // namespace

// ---------------------------------------------------------------------------
// SiegelMatrix

SiegelMatrix::SiegelMatrix(CMat entries) : c_(std::move(entries)) {
  if (c_.rows() == 0 || c_.rows() != c_.cols())
    throw ParameterError("SiegelMatrix: matrix must be square and non-empty");
  if (!c_.allFinite())
    throw ParameterError("SiegelMatrix: non-finite entries");
  if (linalg::asymmetry(c_) > symmetry_tolerance(c_))
    throw ParameterError("SiegelMatrix: matrix is not symmetric");
  c_ = (0.5 * (c_ + c_.transpose())).eval();
  const RMat im = c_.imag();
  const auto r_im = linalg::symmetric_range(im);
  if (!(r_im.min > 0.0))
    throw ParameterError("SiegelMatrix: imaginary part is not positive definite");
  inv_ = linalg::checked_inverse(c_, "SiegelMatrix");
  inv_ = (0.5 * (inv_ + inv_.transpose())).eval();
  const RMat im_neg_inv = (-inv_).imag();
  const auto r_inv = linalg::symmetric_range(im_neg_inv);
  theta_ = std::min(r_im.min, r_inv.min);
  big_theta_ = std::max(r_im.max, r_inv.max);
  det_im_quarter_ = std::pow(im.determinant(), 0.25);
}

SiegelMatrix SiegelMatrix::scalar(cplx c, int d) {
  return SiegelMatrix(CMat::Identity(d, d) * c);
}

PhasePoint phase_point(double q, double p) {
  return {RVec::Constant(1, q), RVec::Constant(1, p)};
}

// ---------------------------------------------------------------------------
// GaussianWavePacket

GaussianWavePacket::GaussianWavePacket(double epsilon, PhasePoint center, SiegelMatrix width,
                                       double action)
    : eps_(epsilon), center_(std::move(center)), width_(std::move(width)), action_(action) {
  if (!(eps_ > 0.0) || !std::isfinite(eps_))
    throw ParameterError("GaussianWavePacket: epsilon must be positive");
  if (center_.q.size() != center_.p.size() || center_.q.size() != width_.dim())
    throw ParameterError("GaussianWavePacket: dimension mismatch between center and width");
  if (!center_.q.allFinite() || !center_.p.allFinite() || !std::isfinite(action_))
    throw ParameterError("GaussianWavePacket: non-finite center or action");
  const int d = dim();
  prefactor_ = std::pow(kPi * eps_, -0.25 * d) * width_.det_imag_quarter();
}

cplx GaussianWavePacket::operator()(std::span<const double> x) const {
  const int d = dim();
  const CMat &c = width_.matrix();
  cplx quad{0.0, 0.0};
  double lin = 0.0;
  for (int i = 0; i < d; ++i) {
    const double yi = x[i] - center_.q(i);
    lin += center_.p(i) * yi;
    cplx row = c(i, i) * (0.5 * yi);
    for (int j = 0; j < i; ++j)
      row += c(i, j) * (x[j] - center_.q(j));
    quad += row * yi;
  }
  return prefactor_ * std::exp(I * ((quad + lin + action_) / eps_));
}

cplx GaussianWavePacket::operator()(double x) const {
  if (dim() != 1)
    throw ParameterError("GaussianWavePacket: scalar evaluation requires d == 1");
  return (*this)(std::span<const double>(&x, 1));
}

GaussianWavePacket GaussianWavePacket::with_center(PhasePoint z) const {
  return GaussianWavePacket(eps_, std::move(z), width_, action_);
}

GaussianWavePacket GaussianWavePacket::with_action(double s) const {
  return GaussianWavePacket(eps_, center_, width_, s);
}

GaussianWavePacket GaussianWavePacket::mirrored() const {
  return GaussianWavePacket(eps_, {-center_.q, -center_.p}, width_, action_);
}

// ---------------------------------------------------------------------------
// SpatialGrid / GridFunction

SpatialGrid::SpatialGrid(std::vector<double> lower, std::vector<double> upper,
                         std::vector<int> counts, bool periodic)
    : lower_(std::move(lower)), upper_(std::move(upper)), counts_(std::move(counts)),
      periodic_(periodic), size_(1) {
  if (counts_.empty() || lower_.size() != counts_.size() || upper_.size() != counts_.size())
    throw ParameterError("SpatialGrid: bounds and counts must have the same non-zero length");
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] < 2)
      throw ParameterError("SpatialGrid: counts must be >= 2");
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i]))
      throw ParameterError("SpatialGrid: bounds must be finite with lower < upper");
    size_ *= static_cast<std::size_t>(counts_[i]);
  }
}

double SpatialGrid::spacing(int axis) const {
  const double len = upper_[axis] - lower_[axis];
  return periodic_ ? len / counts_[axis] : len / (counts_[axis] - 1);
}

double SpatialGrid::coordinate(int axis, int i) const {
  return lower_[axis] + i * spacing(axis);
}

void SpatialGrid::point(std::size_t flat, std::span<double> x) const {
  for (int a = dim() - 1; a >= 0; --a) {
    const auto n = static_cast<std::size_t>(counts_[a]);
    x[a] = coordinate(a, static_cast<int>(flat % n));
    flat /= n;
  }
}

double SpatialGrid::weight(std::size_t flat) const {
  double w = 1.0;
  for (int a = dim() - 1; a >= 0; --a) {
    const auto n = static_cast<std::size_t>(counts_[a]);
    const auto i = flat % n;
    flat /= n;
    w *= spacing(a);
    if (!periodic_ && (i == 0 || i == n - 1))
      w *= 0.5;
  }
  return w;
}

bool SpatialGrid::operator==(const SpatialGrid &o) const {
  return periodic_ == o.periodic_ && counts_ == o.counts_ && lower_ == o.lower_ &&
         upper_ == o.upper_;
}

GridFunction::GridFunction(SpatialGrid g) : grid(std::move(g)), values(grid.size()) {}

GridFunction::GridFunction(SpatialGrid g, std::vector<cplx> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size())
    throw ParameterError("GridFunction: value count does not match grid size");
}

double GridFunction::norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    s += grid.weight(i) * std::norm(values[i]);
  return std::sqrt(s);
}

cplx GridFunction::inner(const GridFunction &other) const {
  if (!(grid == other.grid))
    throw ParameterError("GridFunction::inner: grid mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < values.size(); ++i)
    s += grid.weight(i) * std::conj(values[i]) * other.values[i];
  return s;
}

GridFunction evaluate(const GaussianWavePacket &packet, const SpatialGrid &grid) {
  if (packet.dim() != grid.dim())
    throw ParameterError("evaluate: packet and grid dimensions differ");
  GridFunction out(grid);
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    double x[8];
    std::vector<double> big;
    std::span<double> xs;
    if (grid.dim() <= 8) {
      xs = std::span<double>(x, grid.dim());
    } else {
      big.resize(grid.dim());
      xs = big;
    }
    grid.point(static_cast<std::size_t>(k), xs);
    out.values[k] = packet(xs);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inner products

OverlapKernel::OverlapKernel(const SiegelMatrix &bra, const SiegelMatrix &ket, double epsilon)
    : d_(bra.dim()), eps_(epsilon) {
  if (ket.dim() != d_)
    throw ParameterError("OverlapKernel: dimension mismatch");
  if (!(epsilon > 0.0))
    throw ParameterError("OverlapKernel: epsilon must be positive");
  const CMat c1bar = bra.conj();
  const CMat &c2 = ket.matrix();
  const CMat b = c2 - c1bar;
  const CMat binv = linalg::checked_inverse(b, "inner_product");
  const cplx sq = linalg::sqrt_det_right_half_plane(-I * b);
  amp_ = std::pow(2.0, 0.5 * d_) * bra.det_imag_quarter() * ket.det_imag_quarter() / sq;
  const CMat diff = ket.inverse() - c1bar.inverse();
  mq_ = linalg::checked_inverse(diff, "inner_product");
  mp_ = -binv;
  cross_ = binv * (c2 + c1bar);
}

cplx OverlapKernel::eval(const double *q1, const double *p1, const double *q2,
                         const double *p2) const {
  const int d = d_;
  double lin = 0.0;
  cplx quad{0.0, 0.0};
  for (int i = 0; i < d; ++i) {
    const double dqi = q2[i] - q1[i];
    const double dpi = p2[i] - p1[i];
    lin += (p1[i] + p2[i]) * (q1[i] - q2[i]);
    for (int j = 0; j < d; ++j) {
      const double dqj = q2[j] - q1[j];
      const double dpj = p2[j] - p1[j];
      quad += dqi * mq_(i, j) * dqj + dpi * mp_(i, j) * dpj + dpi * cross_(i, j) * dqj;
    }
  }
  return amp_ * std::exp((I / (2.0 * eps_)) * (quad + lin));
}

cplx OverlapKernel::operator()(const PhasePoint &z1, const PhasePoint &z2) const {
  if (z1.dim() != d_ || z2.dim() != d_)
    throw ParameterError("OverlapKernel: dimension mismatch");
  return eval(z1.q.data(), z1.p.data(), z2.q.data(), z2.p.data());
}

namespace {

void check_compatible(const GaussianWavePacket &g1, const GaussianWavePacket &g2,
                      const char *what) {
  if (g1.dim() != g2.dim())
    throw ParameterError(std::string(what) + ": dimension mismatch");
  const double e1 = g1.epsilon(), e2 = g2.epsilon();
  if (std::abs(e1 - e2) > 1e-14 * std::max(e1, e2))
    throw ParameterError(std::string(what) + ": epsilon mismatch");
}

} // namespace

cplx inner_product(const GaussianWavePacket &g1, const GaussianWavePacket &g2) {
  check_compatible(g1, g2, "inner_product");
  const OverlapKernel kernel(g1.width(), g2.width(), g1.epsilon());
  const cplx phase = std::exp(I * ((g2.action() - g1.action()) / g1.epsilon()));
  return kernel(g1.center(), g2.center()) * phase;
}

double overlap_bound(const GaussianWavePacket &g1, const GaussianWavePacket &g2, double theta,
                     double big_theta) {
  check_compatible(g1, g2, "overlap_bound");
  if (!(theta > 0.0) || !(big_theta >= theta))
    throw ParameterError("overlap_bound: need 0 < theta <= Theta");
  const double dist2 =
      (g2.q() - g1.q()).squaredNorm() + (g2.p() - g1.p()).squaredNorm();
  const double gamma = std::pow(big_theta / theta, g1.dim());
  return std::sqrt(gamma) * std::exp(-theta / (8.0 * g1.epsilon()) * dist2);
}

// ---------------------------------------------------------------------------
// Hagedorn parametrization

HagedornPair to_hagedorn(const SiegelMatrix &c) {
  const CMat q = linalg::inverse_sqrt_spd(c.imag()).cast<cplx>();
  return {q, c.matrix() * q};
}

SymplecticResidual symplectic_residual(const CMat &Q, const CMat &P) {
  const Eigen::Index d = Q.rows();
  const double t = (Q.transpose() * P - P.transpose() * Q).cwiseAbs().maxCoeff();
  const double a =
      (Q.adjoint() * P - P.adjoint() * Q - 2.0 * I * CMat::Identity(d, d)).cwiseAbs().maxCoeff();
  return {t, a};
}

SiegelMatrix from_hagedorn(const CMat &Q, const CMat &P) {
  if (Q.rows() == 0 || Q.rows() != Q.cols() || P.rows() != Q.rows() || P.cols() != Q.cols())
    throw ParameterError("from_hagedorn: Q and P must be square of equal size");
  const CMat qinv = linalg::checked_inverse(Q, "from_hagedorn");
  if (symplectic_residual(Q, P).max() > 1e-8)
    throw ConsistencyError("from_hagedorn: symplectic relations violated");
  CMat c = P * qinv;
  if (linalg::asymmetry(c) > 1e-8 * std::max(1.0, c.cwiseAbs().maxCoeff()))
    throw ConsistencyError("from_hagedorn: P Q^{-1} is not symmetric");
  c = (0.5 * (c + c.transpose())).eval();
  return SiegelMatrix(c);
}

// ---------------------------------------------------------------------------

GaussianWavePacket fourier_transform(const GaussianWavePacket &packet) {
  const SiegelMatrix &c = packet.width();
  const SiegelMatrix width(-c.inverse());
  const cplx sq = linalg::sqrt_det_right_half_plane(-I * c.matrix());
  const double s = packet.action() - packet.p().dot(packet.q()) -
                   packet.epsilon() * std::arg(sq);
  return GaussianWavePacket(packet.epsilon(), {packet.p(), -packet.q()}, width, s);
}

SiegelMatrix random_siegel(std::mt19937_64 &rng, int d) {
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> diag(0.5, 2.0);
  std::uniform_real_distribution<double> off(-0.5, 0.5);
  RMat a(d, d), l = RMat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      a(i, j) = a(j, i) = sym(rng);
      l(i, j) = (i == j) ? diag(rng) : off(rng);
    }
  }
  CMat c(d, d);
  c.real() = a;
  c.imag() = l * l.transpose();
  return SiegelMatrix(c);
}

double packet_l2_distance(const GaussianWavePacket &u, const GaussianWavePacket &v) {
  check_compatible(u, v, "packet_l2_distance");
  const int d = u.dim();
  if (d > 2)
    throw UnsupportedError("packet_l2_distance: only d <= 2 is supported");
  const double eps = u.epsilon();
  // Position and momentum spreads of |u|^2 and |F u|^2, per packet.
  double sx_max = 0.0, sx_min = 1e300, sp_max = 0.0;
  for (const auto *g : {&u, &v}) {
    const auto rq = linalg::symmetric_range(g->width().imag());
    const auto rp = linalg::symmetric_range((-g->width().inverse()).imag());
    sx_max = std::max(sx_max, std::sqrt(eps / (2.0 * rq.min)));
    sx_min = std::min(sx_min, std::sqrt(eps / (2.0 * rq.max)));
    sp_max = std::max(sp_max, std::sqrt(eps / (2.0 * rp.min)));
  }
  std::vector<double> lo(d), hi(d);
  std::vector<int> n(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = std::min(u.q()(a), v.q()(a)) - 12.0 * sx_max;
    hi[a] = std::max(u.q()(a), v.q()(a)) + 12.0 * sx_max;
    const double pmax = std::max(std::abs(u.p()(a)), std::abs(v.p()(a))) + 12.0 * sp_max;
    const double dx = std::min(sx_min / 4.0, 0.5 * kPi * eps / pmax);
    n[a] = std::max(64, static_cast<int>(std::ceil((hi[a] - lo[a]) / dx)) + 1);
  }
  const SpatialGrid grid(lo, hi, n, false);
  const auto gu = evaluate(u, grid);
  const auto gv = evaluate(v, grid);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    s += grid.weight(i) * std::norm(gu.values[i] - gv.values[i]);
  return std::sqrt(s);
}

} // namespace tstg
