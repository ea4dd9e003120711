#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "oracles.hpp"
#include "tstg/error.hpp"
#include "tstg/reference.hpp"
#include "tstg/tstg.hpp"

using namespace tstg;

namespace {

const double kEta = 1.3544;

GaussianWavePacket packet1(double eps, double q, double p, cplx c = I, double s = 0.0) {
  return GaussianWavePacket(eps, phase_point(q, p), SiegelMatrix::scalar(c), s);
}

SplitStepConfig ssf(double dt, double eps = 1.0, int n = 256, double a = -8.0, double b = 8.0) {
  return SplitStepConfig{SpatialGrid::periodic(a, b, n), dt, eps};
}

// Free Schroedinger flow of a 1D Gaussian: C(t) = C/(1+tC), q + pt,
// S + p^2 t/2, amplitude (1+tC)^{-1/2}.
cplx free_gaussian(double eps, double q, double p, cplx c, double t, double x) {
  const cplx den = 1.0 + t * c;
  const cplx ct = c / den;
  const double qt = q + p * t;
  const double st = 0.5 * p * p * t;
  const double pref = std::pow(std::numbers::pi * eps, -0.25) * std::pow(c.imag(), 0.25);
  const double y = x - qt;
  return pref / std::sqrt(den) * std::exp(I / eps * (0.5 * ct * y * y + p * y + st));
}

double max_abs_diff(const GridFunction &a, const std::vector<cplx> &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b[i]));
  return m;
}

} // namespace

TEST_CASE("split-step configuration") {
  CHECK_THROWS_AS(SplitStepConfig({SpatialGrid::closed(-8, 8, 256), 0.01, 1.0}).validate(),
                  ParameterError);
  CHECK_THROWS_AS(ssf(0.01, 1.0, 200).validate(), ParameterError);
  CHECK_THROWS_AS(ssf(-0.01).validate(), ParameterError);
  CHECK_THROWS_AS(ssf(0.01, 0.0).validate(), ParameterError);
  auto relaxed = ssf(0.01, 1.0, 200);
  relaxed.require_power_of_two = false;
  CHECK_NOTHROW(relaxed.validate());
}

TEST_CASE("free particle step is exact") {
  const auto cfg = ssf(0.01);
  const auto psi0 = evaluate(packet1(1.0, 0.0, 1.0), cfg.grid);
  const auto out = split_step_propagate(psi0, Potential::free(1), cfg, 1);
  REQUIRE(out.size() == 2);
  std::vector<cplx> exact(cfg.grid.size());
  for (std::size_t i = 0; i < exact.size(); ++i)
    exact[i] = free_gaussian(1.0, 0.0, 1.0, I, 0.01, cfg.grid.coordinate(0, static_cast<int>(i)));
  CHECK(max_abs_diff(out[1], exact) < 1e-10);

  // any dt for band-limited data
  const auto wide = ssf(1.0, 1.0, 512, -16.0, 16.0);
  const auto big =
      split_step_propagate(evaluate(packet1(1.0, 0.0, 1.0), wide.grid), Potential::free(1), wide, 1);
  exact.resize(wide.grid.size());
  for (std::size_t i = 0; i < exact.size(); ++i)
    exact[i] = free_gaussian(1.0, 0.0, 1.0, I, 1.0, wide.grid.coordinate(0, static_cast<int>(i)));
  CHECK(max_abs_diff(big[1], exact) < 1e-10);
}

TEST_CASE("harmonic oscillator against the closed form") {
  const auto cfg = ssf(1e-4);
  const auto z0 = phase_point(1.0, 0.0);
  const auto psi0 = harmonic_analytic(z0, 1.0, 0.0, cfg.grid);
  const auto out = split_step_propagate(psi0, Potential::harmonic(1), cfg, 10000, 10000);
  REQUIRE(out.size() == 2);
  CHECK(l2_error(out[1], harmonic_analytic(z0, 1.0, 1.0, cfg.grid), {-8.0}, {8.0}) < 1e-8);
}

TEST_CASE("split-step order two") {
  const auto z0 = phase_point(1.0, 0.5);
  double err[2];
  int i = 0;
  for (double dt : {0.02, 0.01}) {
    const auto cfg = ssf(dt);
    const auto psi0 = harmonic_analytic(z0, 1.0, 0.0, cfg.grid);
    const int n = static_cast<int>(std::lround(1.0 / dt));
    const auto out = split_step_propagate(psi0, Potential::harmonic(1), cfg, n, n);
    err[i++] = l2_error(out[1], harmonic_analytic(z0, 1.0, 1.0, cfg.grid));
  }
  CHECK(err[0] / err[1] >= 3.5);
  CHECK(err[0] / err[1] <= 4.5);
}

TEST_CASE("norm and energy along a double-well trajectory") {
  const auto cfg = ssf(0.01);
  const auto well = Potential::double_well(kEta);
  const auto psi0 = evaluate(packet1(1.0, -std::sqrt(2 * kEta), 0.0), cfg.grid);
  const auto out = split_step_propagate(psi0, well, cfg, 10000, 50);
  CHECK(out.back().norm() >= 1.0 - 1e-9);
  CHECK(out.back().norm() <= 1.0 + 1e-9);
  // Strang splitting keeps the energy within an O(dt^2) band; the drift is
  // the change of the energy averaged over the first and last 50 samples
  const double e0 = energy_expectation(out.front(), well, 1.0).energy;
  double first = 0.0, last = 0.0, band = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double e = energy_expectation(out[i], well, 1.0).energy;
    band = std::max(band, std::abs(e - e0) / std::abs(e0));
    if (i < 50)
      first += e / 50;
    if (i >= out.size() - 50)
      last += e / 50;
  }
  CHECK(std::abs(last - first) / std::abs(e0) < 1e-6);
  CHECK(band < 1e-4);
}

TEST_CASE("boundary leakage is reported") {
  const auto cfg = ssf(0.01);
  GridFunction psi0 = evaluate(packet1(1.0, 7.0, 0.0), cfg.grid);
  psi0.values = [&] {
    auto v = psi0.values;
    const double n = psi0.norm();
    for (auto &x : v)
      x /= n;
    return v;
  }();
  CHECK_THROWS_AS(split_step_propagate(psi0, Potential::free(1), cfg, 1), AccuracyError);

  const auto off = evaluate(packet1(1.0, 0.0, 0.0), SpatialGrid::periodic(-8, 8, 128));
  CHECK_THROWS_AS(split_step_propagate(off, Potential::free(1), cfg, 1), ParameterError);
  auto unnormalized = evaluate(packet1(1.0, 0.0, 0.0), cfg.grid);
  for (auto &x : unnormalized.values)
    x *= 2.0;
  CHECK_THROWS_AS(split_step_propagate(unnormalized, Potential::free(1), cfg, 1), ParameterError);
}

TEST_CASE("harmonic_analytic") {
  const auto grid = SpatialGrid::periodic(-8, 8, 256);
  const auto z0 = phase_point(1.0, 0.0);
  const auto start = harmonic_analytic(z0, 1.0, 0.0, grid);
  const auto direct = evaluate(packet1(1.0, 1.0, 0.0), grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(start.values[i] - direct.values[i]) < 1e-15);

  // t = pi/2: center (0, -1), S = 0, overall phase exp(-i pi/4)
  const double t = std::numbers::pi / 2;
  const auto quarter = harmonic_analytic(z0, 1.0, t, grid);
  for (std::size_t i = 0; i < grid.size(); i += 7) {
    const double x = grid.coordinate(0, static_cast<int>(i));
    const cplx expect = oracle::packet1d(1.0, 0.0, -1.0, I, 0.0, x) * std::exp(-I * t / 2.0);
    CHECK(std::abs(quarter.values[i] - expect) < 1e-14);
  }

  // coherent state: |psi(t)| is |psi0| translated to q(t)
  const double s = 2.3;
  const auto moved = harmonic_analytic(phase_point(1.0, 0.5), 1.0, s, grid);
  const double qt = std::cos(s) + 0.5 * std::sin(s);
  for (std::size_t i = 0; i < grid.size(); i += 5) {
    const double x = grid.coordinate(0, static_cast<int>(i));
    CHECK(std::abs(std::abs(moved.values[i]) - std::abs(oracle::packet1d(1.0, qt, 0.0, I, 0.0, x))) <
          1e-14);
  }

  // agrees with the general exact flow
  const auto general = evaluate(harmonic_exact(packet1(1.0, 1.0, 0.5), s), grid);
  CHECK(l2_error(moved, general) < 1e-12);

  CHECK_THROWS_AS(
      harmonic_analytic(PhasePoint{RVec::Zero(2), RVec::Zero(2)}, 1.0, 1.0,
                        SpatialGrid({-8, -8}, {8, 8}, {16, 16}, true)),
      UnsupportedError);
}

TEST_CASE("harmonic_exact") {
  const auto u = packet1(0.5, 1.0, -0.3, {0.4, 1.5}, 0.2);
  const auto back = harmonic_exact(u, 2 * std::numbers::pi);
  // full period: same packet up to the Maslov sign
  CHECK(std::abs(std::abs(inner_product(back, u)) - 1.0) < 1e-12);
  CHECK((back.q() - u.q()).norm() < 1e-12);
  CHECK(std::abs(back.width().matrix()(0, 0) - u.width().matrix()(0, 0)) < 1e-12);
  const auto same = harmonic_exact(u, 0.0);
  CHECK(packet_l2_distance(same, u) < 1e-14);
}

TEST_CASE("l2_error") {
  const auto grid = SpatialGrid::closed(-10, 10, 4001);
  const auto a = evaluate(packet1(1.0, 0.3, 0.0), grid);
  CHECK(l2_error(a, a, {-8.0}, {8.0}) == 0.0);
  const GridFunction zero(grid);
  CHECK(l2_error(a, zero, {-8.0}, {8.0}) == doctest::Approx(1.0).epsilon(1e-10));

  const auto narrow1 = evaluate(packet1(0.01, -4.0, 0.0), grid);
  const auto narrow2 = evaluate(packet1(0.01, 4.0, 0.0), grid);
  GridFunction x(grid), y(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    x.values[i] = 0.6 * narrow1.values[i];
    y.values[i] = -0.8 * narrow2.values[i];
  }
  CHECK(l2_error(x, y, {-8.0}, {8.0}) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(l2_error(x, y) == doctest::Approx(1.0).epsilon(1e-10));
  // only the part inside the domain counts
  CHECK(l2_error(x, y, {-8.0}, {0.0}) == doctest::Approx(0.6).epsilon(1e-10));

  const GridFunction other(SpatialGrid::closed(-10, 10, 4000));
  CHECK_THROWS_AS(l2_error(a, other, {-8.0}, {8.0}), ParameterError);
  CHECK_THROWS_AS(l2_error(a, a, {-8.0, -8.0}, {8.0, 8.0}), ParameterError);
}

TEST_CASE("reference cache round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "tstg_test_cache";
  std::filesystem::remove_all(dir);
  ReferenceCache cache(dir.string());
  const auto cfg = ssf(0.01, 1.0, 128);
  const auto u = packet1(1.0, -1.0, 0.5);
  const auto psi0 = evaluate(u, cfg.grid);
  const auto well = Potential::double_well(kEta);
  const auto key = reference_key("double_well", cfg, u, 50, 10);
  CHECK(key != reference_key("double_well", ssf(0.02, 1.0, 128), u, 50, 10));
  CHECK(key != reference_key("double_well", cfg, packet1(1.0, -1.0, 0.6), 50, 10));
  CHECK(key != reference_key("harmonic", cfg, u, 50, 10));
  CHECK(ReferenceCache::hash(key) == ReferenceCache::hash(key));

  const auto first = cache.get(key, psi0, well, cfg, 50, 10);
  CHECK(std::filesystem::exists(cache.path_for(key)));
  const auto second = cache.get(key, psi0, well, cfg, 50, 10);
  const auto direct = split_step_propagate(psi0, well, cfg, 50, 10);
  REQUIRE(first.size() == 6);
  REQUIRE(second.size() == first.size());
  for (std::size_t f = 0; f < first.size(); ++f)
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
      CHECK(first[f].values[i] == second[f].values[i]);
      CHECK(first[f].values[i] == direct[f].values[i]);
    }
  std::filesystem::remove_all(dir);
}
