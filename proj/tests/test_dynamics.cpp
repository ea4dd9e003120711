#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tstg/dynamics.hpp"
#include "tstg/error.hpp"
#include "tstg/reference.hpp"

using namespace tstg;

namespace {

const double kEta = 1.3544;

GaussianWavePacket packet1(double eps, double q, double p, cplx c = I, double s = 0.0) {
  return GaussianWavePacket(eps, phase_point(q, p), SiegelMatrix::scalar(c), s);
}

HagedornState state1(double q, double p, cplx Q, cplx P, double S = 0.0) {
  HagedornState s;
  s.q = RVec::Constant(1, q);
  s.p = RVec::Constant(1, p);
  s.Q = CMat::Constant(1, 1, Q);
  s.P = CMat::Constant(1, 1, P);
  s.S = S;
  return s;
}

// E[f(X)] for X ~ N(m, var) by Simpson.
double normal_mean(const std::function<double(double)> &f, double m, double var) {
  const double sd = std::sqrt(var);
  return oracle::simpson<double>(
      [&](double x) {
        return f(x) * std::exp(-(x - m) * (x - m) / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
      },
      m - 14 * sd, m + 14 * sd, 20000);
}

double dw(double x) { return std::pow(x, 4) / (16 * kEta) - 0.5 * x * x; }
double dw1(double x) { return std::pow(x, 3) / (4 * kEta) - x; }
double dw2(double x) { return 3 * x * x / (4 * kEta) - 1.0; }

PropagatorConfig config(Method m, double tau, double h) {
  PropagatorConfig c;
  c.method = m;
  c.integrator =
      m == Method::variational ? Integrator::variational_splitting : Integrator::stoermer_verlet;
  c.tau = tau;
  c.h = h;
  return c;
}

} // namespace

TEST_CASE("polynomials and built-in potentials") {
  const Polynomial p(2, {{1.0, {2, 0}}, {3.0, {1, 1}}, {2.0, {2, 0}}, {-1.0, {0, 0}}});
  CHECK(p.terms().size() == 3);
  CHECK(p.degree() == 2);
  RVec x(2);
  x << 1.5, -2.0;
  CHECK(p(x) == doctest::Approx(3 * 2.25 + 3 * 1.5 * -2.0 - 1.0));
  const auto dx = p.derivative(0);
  CHECK(dx(x) == doctest::Approx(6 * 1.5 + 3 * -2.0));
  CHECK_THROWS_AS(Polynomial(1, {{1.0, {1, 1}}}), ParameterError);
  CHECK_THROWS_AS(Polynomial(1, {{1.0, {-1}}}), ParameterError);

  const auto ho = Potential::harmonic(1);
  CHECK(ho.is_quadratic());
  CHECK(ho.is_polynomial());
  const auto well = Potential::double_well(kEta);
  CHECK_FALSE(well.is_quadratic());
  for (double q : {-2.0, -0.5, 0.0, 1.3}) {
    const RVec v = RVec::Constant(1, q);
    CHECK(well.value(v) == doctest::Approx(dw(q)));
    CHECK(well.gradient(v)(0) == doctest::Approx(dw1(q)));
    CHECK(well.hessian(v)(0, 0) == doctest::Approx(dw2(q)));
  }
  CHECK(Potential::free(2).value(x) == 0.0);
  CHECK_THROWS_AS(Potential::double_well(0.0), ParameterError);
}

TEST_CASE("derivative consistency") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<RVec> probes;
  for (int i = 0; i < 10; ++i) {
    RVec x(2);
    x << u(rng), u(rng);
    probes.push_back(x);
  }
  const Potential v(Polynomial(2, {{0.3, {4, 0}}, {-1.0, {1, 2}}, {0.5, {0, 2}}, {2.0, {1, 0}}}));
  CHECK(derivative_consistency(v, probes) <= 1e-5);

  const Potential c(
      1, [](const RVec &x) { return std::cos(x(0)); },
      [](const RVec &x) { return RVec::Constant(1, -std::sin(x(0))); },
      [](const RVec &x) { return RMat::Constant(1, 1, -std::cos(x(0))); }, "cosine");
  std::vector<RVec> p1;
  for (int i = 0; i < 10; ++i)
    p1.push_back(RVec::Constant(1, u(rng)));
  CHECK(derivative_consistency(c, p1) <= 1e-5);

  const Potential wrong(
      1, [](const RVec &x) { return std::cos(x(0)); },
      [](const RVec &x) { return RVec::Constant(1, std::sin(x(0))); },
      [](const RVec &x) { return RMat::Constant(1, 1, -std::cos(x(0))); }, "wrong");
  CHECK(derivative_consistency(wrong, p1) > 1e-2);
}

TEST_CASE("Gaussian expectations") {
  const auto ho = Potential::harmonic(1);
  const auto e = gaussian_expectations(packet1(1.0, 0.0, 0.0), ho);
  CHECK(e.value == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(e.hessian(0, 0) == doctest::Approx(1.0));
  CHECK(gaussian_expectations(packet1(1.0, 2.0, 0.7, {0.3, 2.0}), ho).hessian(0, 0) == doctest::Approx(1.0));

  const double q0 = -std::sqrt(2 * kEta);
  const auto w = gaussian_expectations(packet1(1.0, q0, 0.0), Potential::double_well(kEta));
  CHECK(std::abs(w.value - normal_mean(dw, q0, 0.5)) <= 1e-10 * std::abs(w.value));
  CHECK(std::abs(w.gradient(0) - normal_mean(dw1, q0, 0.5)) <= 1e-10 * std::abs(w.gradient(0)));
  CHECK(std::abs(w.hessian(0, 0) - normal_mean(dw2, q0, 0.5)) <= 1e-10 * std::abs(w.hessian(0, 0)));

  // variance is (eps/2)/Im C
  const auto u = packet1(0.3, 0.4, 1.0, {0.5, 1.7});
  const auto m = gaussian_expectations(u, Potential::double_well(kEta));
  const double var = 0.15 / 1.7;
  CHECK(m.value == doctest::Approx(normal_mean(dw, 0.4, var)).epsilon(1e-10));
}

TEST_CASE("Gaussian expectations in two dimensions") {
  const Potential v(Polynomial(2, {{0.2, {4, 0}}, {-0.7, {2, 1}}, {0.1, {1, 3}}, {1.0, {0, 2}}}));
  RMat sigma(2, 2);
  sigma << 0.4, 0.1, 0.1, 0.3;
  RVec q(2);
  q << 0.3, -0.5;
  const auto e = gaussian_expectations(v, q, sigma);
  const RMat inv = sigma.inverse();
  const double norm = 1.0 / (2 * std::numbers::pi * std::sqrt(sigma.determinant()));
  auto density = [&](double x, double y) {
    RVec d(2);
    d << x - q(0), y - q(1);
    return norm * std::exp(-0.5 * d.dot(inv * d));
  };
  const double val = oracle::simpson2<double>(
      [&](double x, double y) {
        RVec z(2);
        z << x, y;
        return v.value(z) * density(x, y);
      },
      q(0) - 8, q(0) + 8, q(1) - 8, q(1) + 8, 800);
  const double gy = oracle::simpson2<double>(
      [&](double x, double y) {
        RVec z(2);
        z << x, y;
        return v.gradient(z)(1) * density(x, y);
      },
      q(0) - 8, q(0) + 8, q(1) - 8, q(1) + 8, 800);
  CHECK(e.value == doctest::Approx(val).epsilon(1e-9));
  CHECK(e.gradient(1) == doctest::Approx(gy).epsilon(1e-9));
}

TEST_CASE("non-polynomial potentials need the quadrature fallback") {
  const Potential c(
      1, [](const RVec &x) { return std::cos(x(0)); },
      [](const RVec &x) { return RVec::Constant(1, -std::sin(x(0))); },
      [](const RVec &x) { return RMat::Constant(1, 1, -std::cos(x(0))); }, "cosine");
  const RMat sigma = RMat::Constant(1, 1, 0.3);
  const RVec q = RVec::Constant(1, 0.7);
  CHECK_THROWS_AS(gaussian_expectations(c, q, sigma), UnsupportedError);
  const auto e = gaussian_expectations(c, q, sigma, true);
  CHECK(e.value == doctest::Approx(std::cos(0.7) * std::exp(-0.15)).epsilon(1e-12));
  CHECK(e.gradient(0) == doctest::Approx(-std::sin(0.7) * std::exp(-0.15)).epsilon(1e-12));

  std::vector<double> x, w;
  gauss_hermite(20, x, w);
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += w[i];
    s2 += w[i] * x[i] * x[i];
  }
  CHECK(s == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  CHECK(s2 == doctest::Approx(0.5 * std::sqrt(std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("equations of motion") {
  const auto ho = Potential::harmonic(1);
  const auto s = state1(1.0, 0.0, 1.0, I);
  const auto v = rhs_variational(s, ho, 1.0);
  CHECK(v.q(0) == 0.0);
  CHECK(v.p(0) == doctest::Approx(-1.0));
  CHECK(std::abs(v.Q(0, 0) - I) < 1e-15);
  CHECK(std::abs(v.P(0, 0) + 1.0) < 1e-15);
  CHECK(v.S == doctest::Approx(-0.5));

  const auto n = rhs_nonvariational(s, ho);
  CHECK(n.p(0) == doctest::Approx(-1.0));
  CHECK(n.S == doctest::Approx(-0.5));
  CHECK(std::abs(n.P(0, 0) + s.Q(0, 0)) < 1e-15);

  // quadratic potentials: both sets of equations coincide
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10; ++i) {
    const auto u = GaussianWavePacket(0.5, phase_point(0.3 * i - 1, 0.2 * i), random_siegel(rng, 1));
    const auto hs = hagedorn_state(u);
    const auto a = rhs_variational(hs, ho, 0.5);
    const auto b = rhs_nonvariational(hs, ho);
    CHECK((a.p - b.p).norm() < 1e-15);
    CHECK((a.P - b.P).norm() < 1e-15);
    CHECK((a.Q - b.Q).norm() < 1e-15);
    // the S rates differ by -<V> + V(q) + (eps/4) tr(Q*Q) = 0 for V = x^2/2
    CHECK(std::abs(a.S - b.S) < 1e-14);
  }

  // double well at the minimum q = -2 sqrt(eta): <V'> differs from V'(q) = 0
  const double q0 = -2 * std::sqrt(kEta);
  const auto well = Potential::double_well(kEta);
  const auto hs = hagedorn_state(packet1(1.0, q0, 0.0));
  const auto dv = rhs_variational(hs, well, 1.0);
  const auto dn = rhs_nonvariational(hs, well);
  CHECK(std::abs(dn.p(0)) < 1e-14);
  CHECK(std::abs(dv.p(0) + normal_mean(dw1, q0, 0.5)) < 1e-10);
  CHECK(std::abs(dv.p(0)) > 0.1);
}

TEST_CASE("(Q, P) solves the linearized classical flow") {
  const auto well = Potential::double_well(kEta);
  const auto s = state1(0.8, -0.4, cplx(0.7, 0.2), cplx(0.1, 1.3));
  const auto d = rhs_nonvariational(s, well);
  auto field = [&](double q, double p) {
    return std::array<double, 2>{p, -well.gradient(RVec::Constant(1, q))(0)};
  };
  const double h = 1e-6;
  // real-linear directional derivative applied to Re and Im of (Q, P)
  for (int part = 0; part < 2; ++part) {
    const double dq = part == 0 ? s.Q(0, 0).real() : s.Q(0, 0).imag();
    const double dp = part == 0 ? s.P(0, 0).real() : s.P(0, 0).imag();
    const auto fp = field(s.q(0) + h * dq, s.p(0) + h * dp);
    const auto fm = field(s.q(0) - h * dq, s.p(0) - h * dp);
    const double jq = (fp[0] - fm[0]) / (2 * h), jp = (fp[1] - fm[1]) / (2 * h);
    const double expect_q = part == 0 ? d.Q(0, 0).real() : d.Q(0, 0).imag();
    const double expect_p = part == 0 ? d.P(0, 0).real() : d.P(0, 0).imag();
    CHECK(jq == doctest::Approx(expect_q).epsilon(1e-7));
    CHECK(jp == doctest::Approx(expect_p).epsilon(1e-7));
  }
}

TEST_CASE("propagator configuration") {
  CHECK(config(Method::variational, 0.1, 1e-3).steps() == 100);
  CHECK_THROWS_AS(config(Method::variational, 0.1, 0.3).validate(), ParameterError);
  CHECK_THROWS_AS(config(Method::variational, 0.1, 0.03).validate(), ParameterError);
  auto bad = config(Method::variational, 0.1, 0.01);
  bad.integrator = Integrator::stoermer_verlet;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  CHECK(config(Method::variational, 0.0, 1e-3).steps() == 0);
}

TEST_CASE("Stoermer-Verlet") {
  const auto s = state1(0.3, 1.7, cplx(0.6, 0.1), cplx(0.2, 1.5));
  const auto f = step_stoermer_verlet(s, Potential::free(1), 0.01);
  CHECK(f.q(0) == doctest::Approx(0.3 + 0.017).epsilon(1e-15));
  CHECK(std::abs(f.Q(0, 0) - (s.Q(0, 0) + 0.01 * s.P(0, 0))) < 1e-16);
  CHECK(f.p(0) == s.p(0));

  // energy over 10^4 steps at h = 1e-3: bounded oscillation, no drift of
  // the per-period mean
  const auto ho = Potential::harmonic(1);
  HagedornState x = state1(1.0, 0.0, 1.0, I);
  std::vector<double> energy;
  for (int n = 0; n <= 10000; ++n) {
    energy.push_back(0.5 * x.p(0) * x.p(0) + 0.5 * x.q(0) * x.q(0));
    x = step_stoermer_verlet(x, ho, 1e-3);
  }
  const int period = static_cast<int>(std::lround(2 * std::numbers::pi / 1e-3));
  double first = 0.0, last = 0.0, swing = 0.0;
  for (int i = 0; i < period; ++i) {
    first += energy[i] / period;
    last += energy[energy.size() - period + i] / period;
  }
  for (double e : energy)
    swing = std::max(swing, std::abs(e - energy[0]));
  CHECK(swing < 1e-6);
  CHECK(std::abs(last - first) < 1e-8);
}

TEST_CASE("second order on the harmonic oscillator") {
  const auto ho = Potential::harmonic(1);
  const auto u0 = packet1(1.0, 1.0, 0.0, {0.2, 1.3});
  const auto exact = harmonic_exact(u0, 1.0);
  for (Method m : {Method::variational, Method::nonvariational}) {
    const double e1 = packet_l2_distance(propagate_packet(u0, ho, config(m, 1.0, 0.01)), exact);
    const double e2 = packet_l2_distance(propagate_packet(u0, ho, config(m, 1.0, 0.005)), exact);
    CHECK(e1 / e2 >= 3.5);
    CHECK(e1 / e2 <= 4.5);
  }
}

TEST_CASE("variational splitting preserves the symplectic relations") {
  const auto well = Potential::double_well(kEta);
  HagedornState s = hagedorn_state(packet1(1.0, -std::sqrt(2 * kEta), 0.0, 4.0 * I));
  for (int n = 0; n < 10000; ++n)
    s = step_variational_splitting(s, well, 1.0, 1e-3);
  CHECK(s.residual().max() < 1e-10);
  CHECK(s.width().imag()(0, 0) > 0.0);
}

TEST_CASE("second order on the double well against a fine-step solution") {
  const auto well = Potential::double_well(kEta);
  const auto u0 = packet1(1.0, -std::sqrt(2 * kEta), 0.3);
  for (Method m : {Method::variational, Method::nonvariational}) {
    const auto ref = propagate_packet(u0, well, config(m, 1.0, 1e-5));
    const double e1 = packet_l2_distance(propagate_packet(u0, well, config(m, 1.0, 0.02)), ref);
    const double e2 = packet_l2_distance(propagate_packet(u0, well, config(m, 1.0, 0.01)), ref);
    CHECK(e1 / e2 >= 3.5);
    CHECK(e1 / e2 <= 4.5);
  }
}

TEST_CASE("propagate_packet") {
  const auto ho = Potential::harmonic(1);
  const auto u0 = packet1(1.0, 1.0, 0.0);
  const auto same = propagate_packet(u0, ho, config(Method::variational, 0.0, 1e-3));
  CHECK(packet_l2_distance(same, u0) == 0.0);

  const double t = std::numbers::pi / 2;
  const auto r = propagate_packet(u0, ho, config(Method::variational, t, t / 2000));
  CHECK(std::abs(r.q()(0)) < 1e-6);
  CHECK(std::abs(r.p()(0) + 1.0) < 1e-6);
  CHECK(std::abs(r.width().matrix()(0, 0) - I) < 1e-6);
  const auto exact = harmonic_exact(u0, t);
  CHECK(packet_l2_distance(r, exact) < 1e-6);

  // quadratic exactness: only integrator error remains
  for (Method m : {Method::variational, Method::nonvariational}) {
    const auto y = propagate_packet(u0, ho, config(m, 1.0, 1e-5));
    CHECK(packet_l2_distance(y, harmonic_exact(u0, 1.0)) < 1e-8);
  }

  // unit norm of the output: grid quadrature
  const auto well = Potential::double_well(kEta);
  const auto w = propagate_packet(packet1(1.0, -1.0, 0.5, {0.4, 2.0}), well,
                                  config(Method::variational, 2.0, 1e-3));
  const auto grid = SpatialGrid::closed(-14.0, 14.0, 8001);
  CHECK(evaluate(w, grid).norm() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("propagation failure is reported") {
  // A Hessian that is not symmetric breaks Q^T P - P^T Q = 0.
  const Potential bad(
      2, [](const RVec &x) { return 0.5 * x.squaredNorm(); }, [](const RVec &x) { return RVec(x); },
      [](const RVec &) {
        RMat m(2, 2);
        m << 1.0, 50.0, -50.0, 1.0;
        return m;
      },
      "broken");
  PropagatorConfig c = config(Method::nonvariational, 1.0, 1e-2);
  const GaussianWavePacket u(1.0, {RVec::Constant(2, 0.5), RVec::Zero(2)}, SiegelMatrix::scalar(I, 2));
  CHECK_THROWS_AS(propagate_packet(u, bad, c), IntegrationError);
}
