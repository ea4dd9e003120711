#include "tstg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <unordered_map>

#include "tstg/error.hpp"
#include "tstg/linalg.hpp"

namespace tstg {

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(int dim, std::vector<Monomial> terms) : dim_(dim) {
  if (dim < 1)
    throw ParameterError("Polynomial: dimension must be positive");
  for (auto &t : terms) {
    if (static_cast<int>(t.powers.size()) != dim)
      throw ParameterError("Polynomial: monomial exponent count does not match dimension");
    for (int e : t.powers)
      if (e < 0)
        throw ParameterError("Polynomial: negative exponent");
    if (!std::isfinite(t.coeff))
      throw ParameterError("Polynomial: non-finite coefficient");
    if (t.coeff == 0.0)
      continue;
    auto it = std::find_if(terms_.begin(), terms_.end(),
                           [&](const Monomial &m) { return m.powers == t.powers; });
    if (it != terms_.end())
      it->coeff += t.coeff;
    else
      terms_.push_back(std::move(t));
  }
}

int Polynomial::degree() const noexcept {
  int deg = 0;
  for (const auto &t : terms_) {
    int s = 0;
    for (int e : t.powers)
      s += e;
    deg = std::max(deg, s);
  }
  return deg;
}

double Polynomial::operator()(const RVec &x) const {
  double s = 0.0;
  for (const auto &t : terms_) {
    double m = t.coeff;
    for (int i = 0; i < dim_; ++i)
      for (int e = 0; e < t.powers[i]; ++e)
        m *= x(i);
    s += m;
  }
  return s;
}

Polynomial Polynomial::derivative(int axis) const {
  std::vector<Monomial> out;
  for (const auto &t : terms_) {
    if (t.powers[axis] == 0)
      continue;
    Monomial m = t;
    m.coeff *= t.powers[axis];
    m.powers[axis] -= 1;
    out.push_back(std::move(m));
  }
  return Polynomial(dim_, std::move(out));
}

// ---------------------------------------------------------------------------
// Potential

Potential::Potential(Polynomial poly, std::string name)
    : dim_(poly.dim()), name_(std::move(name)), poly_(true), value_(std::move(poly)) {
  if (dim_ < 1)
    throw ParameterError("Potential: empty polynomial");
  quadratic_ = value_.degree() <= 2;
  for (int i = 0; i < dim_; ++i)
    grad_.push_back(value_.derivative(i));
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      hess_.push_back(grad_[i].derivative(j));
}

Potential::Potential(int dim, ValueFn value, GradFn grad, HessFn hess, std::string name)
    : dim_(dim), name_(std::move(name)), poly_(false), quadratic_(false), fv_(std::move(value)),
      fg_(std::move(grad)), fh_(std::move(hess)) {
  if (dim < 1 || !fv_ || !fg_ || !fh_)
    throw ParameterError("Potential: callable potential needs value, gradient and Hessian");
}

Potential Potential::harmonic(int dim) {
  std::vector<Monomial> terms;
  for (int i = 0; i < dim; ++i) {
    std::vector<int> e(dim, 0);
    e[i] = 2;
    terms.push_back({0.5, e});
  }
  return Potential(Polynomial(dim, terms), "harmonic");
}

Potential Potential::double_well(double eta) {
  if (!(eta > 0.0))
    throw ParameterError("double_well: eta must be positive");
  return Potential(Polynomial(1, {{1.0 / (16.0 * eta), {4}}, {-0.5, {2}}}), "double_well");
}

Potential Potential::free(int dim) {
  return Potential(Polynomial(dim, {}), "free");
}

double Potential::value(const RVec &q) const {
  return poly_ ? value_(q) : fv_(q);
}

RVec Potential::gradient(const RVec &q) const {
  if (!poly_)
    return fg_(q);
  RVec g(dim_);
  for (int i = 0; i < dim_; ++i)
    g(i) = grad_[i](q);
  return g;
}

RMat Potential::hessian(const RVec &q) const {
  if (!poly_)
    return fh_(q);
  RMat h(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      h(i, j) = hess_[i * dim_ + j](q);
  return h;
}

double derivative_consistency(const Potential &v, const std::vector<RVec> &probes, double step) {
  double worst = 0.0;
  const int d = v.dim();
  for (const auto &q : probes) {
    const RVec g = v.gradient(q);
    const RMat h = v.hessian(q);
    RVec gfd(d);
    RMat hfd(d, d);
    for (int i = 0; i < d; ++i) {
      RVec a = q, b = q;
      a(i) += step;
      b(i) -= step;
      gfd(i) = (v.value(a) - v.value(b)) / (2.0 * step);
      hfd.col(i) = (v.gradient(a) - v.gradient(b)) / (2.0 * step);
    }
    const double gs = std::max(1.0, g.cwiseAbs().maxCoeff());
    const double hs = std::max(1.0, h.cwiseAbs().maxCoeff());
    worst = std::max(worst, (g - gfd).cwiseAbs().maxCoeff() / gs);
    worst = std::max(worst, (h - hfd).cwiseAbs().maxCoeff() / hs);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Gaussian expectations

namespace {

// Raw moments E[x^alpha] of N(q, sigma) via
//   m(alpha) = q_i m(alpha - e_i) + sum_j sigma_ij (alpha - e_i)_j m(alpha - e_i - e_j).
class MomentTable {
public:
  MomentTable(const RVec &q, const RMat &sigma, int max_degree)
      : q_(q), sigma_(sigma), base_(max_degree + 1) {}

  double operator()(std::vector<int> alpha) {
    const std::uint64_t key = encode(alpha);
    if (auto it = memo_.find(key); it != memo_.end())
      return it->second;
    int i = 0;
    while (i < static_cast<int>(alpha.size()) && alpha[i] == 0)
      ++i;
    double m = 1.0;
    if (i < static_cast<int>(alpha.size())) {
      alpha[i] -= 1;
      m = q_(i) * (*this)(alpha);
      for (int j = 0; j < static_cast<int>(alpha.size()); ++j) {
        if (alpha[j] == 0 || sigma_(i, j) == 0.0)
          continue;
        const int aj = alpha[j];
        alpha[j] -= 1;
        m += sigma_(i, j) * aj * (*this)(alpha);
        alpha[j] += 1;
      }
      alpha[i] += 1;
    }
    memo_.emplace(key, m);
    return m;
  }

  double expect(const Polynomial &p) {
    double s = 0.0;
    for (const auto &t : p.terms())
      s += t.coeff * (*this)(t.powers);
    return s;
  }

private:
  std::uint64_t encode(const std::vector<int> &alpha) const {
    std::uint64_t k = 0;
    for (int a : alpha)
      k = k * static_cast<std::uint64_t>(base_) + static_cast<std::uint64_t>(a);
    return k;
  }

  const RVec &q_;
  const RMat &sigma_;
  int base_;
  std::unordered_map<std::uint64_t, double> memo_;
};

// 1D fast path: m_n = q m_{n-1} + (n-1) s m_{n-2}.
Expectations expectations_1d(const Polynomial &v, double q, double s) {
  const int deg = std::max(v.degree(), 0);
  std::vector<double> m(static_cast<std::size_t>(deg) + 1);
  m[0] = 1.0;
  if (deg >= 1)
    m[1] = q;
  for (int n = 2; n <= deg; ++n)
    m[n] = q * m[n - 1] + (n - 1) * s * m[n - 2];
  double ev = 0.0, eg = 0.0, eh = 0.0;
  for (const auto &t : v.terms()) {
    const int e = t.powers[0];
    ev += t.coeff * m[e];
    if (e >= 1)
      eg += t.coeff * e * m[e - 1];
    if (e >= 2)
      eh += t.coeff * e * (e - 1) * m[e - 2];
  }
  return {ev, RVec::Constant(1, eg), RMat::Constant(1, 1, eh)};
}

const std::vector<double> &hermite_nodes20(std::vector<double> *weights_out) {
  static const auto table = [] {
    std::pair<std::vector<double>, std::vector<double>> nw;
    gauss_hermite(20, nw.first, nw.second);
    return nw;
  }();
  if (weights_out)
    *weights_out = table.second;
  return table.first;
}

Expectations quadrature_expectations(const Potential &v, const RVec &q, const RMat &sigma) {
  const int d = v.dim();
  std::vector<double> w;
  const auto &x = hermite_nodes20(&w);
  const int n = static_cast<int>(x.size());
  Eigen::LLT<RMat> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("gaussian_expectations: covariance is not positive definite");
  const RMat l = llt.matrixL();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i)
    total *= static_cast<std::size_t>(n);
  Expectations e{0.0, RVec::Zero(d), RMat::Zero(d, d)};
  const double norm = std::pow(std::numbers::pi, -0.5 * d);
  RVec xi(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double wt = norm;
    for (int a = d - 1; a >= 0; --a) {
      const auto i = rest % static_cast<std::size_t>(n);
      rest /= static_cast<std::size_t>(n);
      xi(a) = std::sqrt(2.0) * x[i];
      wt *= w[i];
    }
    const RVec pt = q + l * xi;
    e.value += wt * v.value(pt);
    e.gradient += wt * v.gradient(pt);
    e.hessian += wt * v.hessian(pt);
  }
  return e;
}

} // namespace

void gauss_hermite(int order, std::vector<double> &nodes, std::vector<double> &weights) {
  if (order < 1)
    throw ParameterError("gauss_hermite: order must be positive");
  // Golub-Welsch on the symmetric Jacobi matrix of the Hermite recurrence.
  RMat j = RMat::Zero(order, order);
  for (int k = 1; k < order; ++k)
    j(k, k - 1) = j(k - 1, k) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<RMat> es(j);
  nodes.resize(order);
  weights.resize(order);
  for (int k = 0; k < order; ++k) {
    nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    weights[k] = std::sqrt(std::numbers::pi) * v0 * v0;
  }
}

Expectations gaussian_expectations(const Potential &v, const RVec &q, const RMat &sigma,
                                   bool allow_quadrature) {
  const int d = v.dim();
  if (q.size() != d || sigma.rows() != d || sigma.cols() != d)
    throw ParameterError("gaussian_expectations: dimension mismatch");
  if (!v.is_polynomial()) {
    if (!allow_quadrature)
      throw UnsupportedError("gaussian_expectations: potential '" + v.name() +
                             "' is not polynomial and quadrature fallback is disabled");
    return quadrature_expectations(v, q, sigma);
  }
  const Polynomial &poly = v.polynomial();
  if (d == 1)
    return expectations_1d(poly, q(0), sigma(0, 0));
  MomentTable m(q, sigma, std::max(poly.degree(), 1));
  Expectations e{m.expect(poly), RVec(d), RMat(d, d)};
  for (int i = 0; i < d; ++i) {
    const Polynomial gi = poly.derivative(i);
    e.gradient(i) = m.expect(gi);
    for (int k = 0; k < d; ++k)
      e.hessian(i, k) = m.expect(gi.derivative(k));
  }
  return e;
}

Expectations gaussian_expectations(const GaussianWavePacket &u, const Potential &v,
                                   bool allow_quadrature) {
  const RMat sigma = 0.5 * u.epsilon() * u.width().imag().inverse();
  return gaussian_expectations(v, u.q(), sigma, allow_quadrature);
}

// ---------------------------------------------------------------------------
// Equations of motion

namespace {

RMat packet_covariance(const CMat &Q, double eps) {
  RMat s = 0.5 * eps * (Q * Q.adjoint()).real();
  return 0.5 * (s + s.transpose());
}

} // namespace

HagedornState hagedorn_state(const GaussianWavePacket &u) {
  auto qp = to_hagedorn(u.width());
  return {0.0, u.q(), u.p(), std::move(qp.Q), std::move(qp.P), u.action()};
}

StateDerivative rhs_variational(const HagedornState &s, const Potential &v, double epsilon,
                                bool allow_quadrature) {
  const auto e = gaussian_expectations(v, s.q, packet_covariance(s.Q, epsilon), allow_quadrature);
  const CMat hq = e.hessian.cast<cplx>() * s.Q;
  const double tr = (s.Q.adjoint() * hq).trace().real();
  return {s.p, -e.gradient, s.P, -hq, 0.5 * s.p.squaredNorm() - e.value + 0.25 * epsilon * tr};
}

StateDerivative rhs_nonvariational(const HagedornState &s, const Potential &v) {
  const CMat hq = v.hessian(s.q).cast<cplx>() * s.Q;
  return {s.p, -v.gradient(s.q), s.P, -hq, 0.5 * s.p.squaredNorm() - v.value(s.q)};
}

int PropagatorConfig::steps() const {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw ParameterError("PropagatorConfig: tau must be non-negative");
  if (!(h > 0.0) || !std::isfinite(h))
    throw ParameterError("PropagatorConfig: h must be positive");
  if (h > tau * (1.0 + 1e-12) && tau > 0.0)
    throw ParameterError("PropagatorConfig: h must not exceed tau");
  const double m = std::round(tau / h);
  if (std::abs(m * h - tau) > 1e-12 * std::max(1.0, tau))
    throw ParameterError("PropagatorConfig: tau is not an integer multiple of h");
  return static_cast<int>(m);
}

void PropagatorConfig::validate() const {
  steps();
  if (method == Method::variational && integrator != Integrator::variational_splitting)
    throw ParameterError("PropagatorConfig: variational method requires variational_splitting");
  if (method == Method::nonvariational && integrator != Integrator::stoermer_verlet)
    throw ParameterError("PropagatorConfig: nonvariational method requires stoermer_verlet");
}

namespace {

// Driving terms of the potential sub-flow: value/gradient/Hessian and the S rate.
struct Drive {
  RVec grad;
  RMat hess;
  double s_rate;
};

Drive point_drive(const HagedornState &s, const Potential &v) {
  return {v.gradient(s.q), v.hessian(s.q), -v.value(s.q)};
}

Drive expectation_drive(const HagedornState &s, const Potential &v, double eps, bool quad) {
  auto e = gaussian_expectations(v, s.q, packet_covariance(s.Q, eps), quad);
  const double tr = (s.Q.adjoint() * (e.hessian.cast<cplx>() * s.Q)).trace().real();
  return {std::move(e.gradient), std::move(e.hessian), -e.value + 0.25 * eps * tr};
}

// Exact potential sub-flow over time a: q and Q are frozen, so the driving
// terms are constant.
void kick(HagedornState &s, const Drive &dr, double a) {
  s.p -= a * dr.grad;
  s.P -= a * (dr.hess.cast<cplx>() * s.Q);
  s.S += a * dr.s_rate;
}

void drift(HagedornState &s, double h) {
  s.q += h * s.p;
  s.Q += h * s.P;
  s.S += 0.5 * h * s.p.squaredNorm();
  s.t += h;
}

} // namespace

HagedornState step_stoermer_verlet(const HagedornState &s, const Potential &v, double h) {
  HagedornState out = s;
  kick(out, point_drive(out, v), 0.5 * h);
  drift(out, h);
  kick(out, point_drive(out, v), 0.5 * h);
  return out;
}

HagedornState step_variational_splitting(const HagedornState &s, const Potential &v,
                                         double epsilon, double h, bool allow_quadrature) {
  HagedornState out = s;
  kick(out, expectation_drive(out, v, epsilon, allow_quadrature), 0.5 * h);
  drift(out, h);
  kick(out, expectation_drive(out, v, epsilon, allow_quadrature), 0.5 * h);
  return out;
}

namespace {

void check_invariants(const HagedornState &s, int step) {
  const auto r = s.residual();
  const bool finite = s.q.allFinite() && s.p.allFinite() && s.Q.allFinite() && s.P.allFinite() &&
                      std::isfinite(s.S);
  if (!finite || !(r.max() <= 1e-6))
    throw IntegrationError("propagation: symplectic residual " + std::to_string(r.max()) +
                           " exceeds 1e-6 at step " + std::to_string(step) +
                           " (t = " + std::to_string(s.t) + ")");
}

} // namespace

Trajectory propagate_state(const HagedornState &s0, const Potential &v, double epsilon,
                           const PropagatorConfig &config) {
  config.validate();
  if (s0.dim() != v.dim())
    throw ParameterError("propagate_state: state and potential dimensions differ");
  const int m = config.steps();
  const double h = m > 0 ? config.tau / m : 0.0;
  HagedornState s = s0;
  double phase = 0.0;
  cplx det_prev = s.Q.determinant();
  for (int n = 1; n <= m; ++n) {
    if (config.method == Method::variational)
      s = step_variational_splitting(s, v, epsilon, h, config.allow_quadrature);
    else
      s = step_stoermer_verlet(s, v, h);
    const cplx det = s.Q.determinant();
    phase += std::arg(det / det_prev);
    det_prev = det;
    if (n % 100 == 0 || n == m)
      check_invariants(s, n);
  }
  return {std::move(s), phase};
}

GaussianWavePacket propagate_packet(const GaussianWavePacket &u, const Potential &v,
                                    const PropagatorConfig &config) {
  const auto traj = propagate_state(hagedorn_state(u), v, u.epsilon(), config);
  const auto &s = traj.state;
  return GaussianWavePacket(u.epsilon(), {s.q, s.p}, from_hagedorn(s.Q, s.P),
                            s.S - 0.5 * u.epsilon() * traj.det_phase);
}

} // namespace tstg
