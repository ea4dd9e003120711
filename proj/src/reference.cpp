#include "tstg/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "tstg/error.hpp"
#include "tstg/linalg.hpp"
#include "tstg/serialize.hpp"

namespace tstg {

void SplitStepConfig::validate() const {
  if (!grid.is_periodic())
    throw ParameterError("SplitStepConfig: grid must be periodic");
  if (!(dt > 0.0) || !(epsilon > 0.0))
    throw ParameterError("SplitStepConfig: dt and epsilon must be positive");
  if (require_power_of_two)
    for (int n : grid.counts())
      if ((n & (n - 1)) != 0)
        throw ParameterError("SplitStepConfig: point counts must be powers of two");
}

SplitStepSolver::SplitStepSolver(SplitStepConfig cfg, const Potential &v) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const SpatialGrid &g = cfg_.grid;
  if (v.dim() != g.dim())
    throw ParameterError("SplitStepSolver: potential and grid dimensions differ");
  fft_ = std::make_unique<Fft>(g.counts());
  const std::size_t n = g.size();
  const int d = g.dim();
  half_potential_.resize(n);
  kinetic_.resize(n);
  std::vector<std::vector<double>> k(d);
  for (int a = 0; a < d; ++a)
    k[a] = fft_wavenumbers(g.counts()[a], g.upper()[a] - g.lower()[a]);
  const double eps = cfg_.epsilon, dt = cfg_.dt;
  RVec x(d);
  std::vector<double> xs(d);
  for (std::size_t i = 0; i < n; ++i) {
    g.point(i, xs);
    for (int a = 0; a < d; ++a)
      x(a) = xs[a];
    half_potential_[i] = std::exp(-I * (0.5 * dt * v.value(x) / eps));
    double k2 = 0.0;
    std::size_t rest = i;
    for (int a = d - 1; a >= 0; --a) {
      const auto m = static_cast<std::size_t>(g.counts()[a]);
      const double ka = k[a][rest % m];
      rest /= m;
      k2 += ka * ka;
    }
    // Fold the inverse-transform normalization into the kinetic phase.
    kinetic_[i] = std::exp(-I * (0.5 * eps * k2 * dt)) / static_cast<double>(n);
  }
}

double SplitStepSolver::boundary_amplitude(const std::vector<cplx> &psi) const {
  const SpatialGrid &g = cfg_.grid;
  const int d = g.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    std::size_t rest = i;
    bool edge = false;
    for (int a = d - 1; a >= 0; --a) {
      const auto m = static_cast<std::size_t>(g.counts()[a]);
      const auto j = rest % m;
      rest /= m;
      edge = edge || j == 0 || j == m - 1;
    }
    if (edge)
      worst = std::max(worst, std::abs(psi[i]));
  }
  return worst;
}

void SplitStepSolver::step(std::vector<cplx> &psi) {
  const std::size_t n = psi.size();
  for (std::size_t i = 0; i < n; ++i)
    psi[i] *= half_potential_[i];
  fft_->forward(psi);
  for (std::size_t i = 0; i < n; ++i)
    psi[i] *= kinetic_[i];
  fft_->backward(psi);
  for (std::size_t i = 0; i < n; ++i)
    psi[i] *= half_potential_[i];
  const double b = boundary_amplitude(psi);
  if (b > cfg_.leakage_tolerance)
    throw AccuracyError("split-step: boundary amplitude " + std::to_string(b) +
                        " exceeds leakage tolerance");
}

std::vector<GridFunction> split_step_propagate(const GridFunction &psi0, const Potential &v,
                                               const SplitStepConfig &cfg, int n_steps,
                                               int record_every) {
  if (!(psi0.grid == cfg.grid))
    throw ParameterError("split_step_propagate: initial state is not on the solver grid");
  if (n_steps < 0 || record_every < 1)
    throw ParameterError("split_step_propagate: need n_steps >= 0 and record_every >= 1");
  const double nrm = psi0.norm();
  if (std::abs(nrm - 1.0) > 1e-8)
    throw ParameterError("split_step_propagate: initial state must have unit norm");
  SplitStepSolver solver(cfg, v);
  std::vector<GridFunction> out;
  out.push_back(psi0);
  std::vector<cplx> psi = psi0.values;
  for (int n = 1; n <= n_steps; ++n) {
    solver.step(psi);
    if (n % record_every == 0 || n == n_steps)
      out.emplace_back(cfg.grid, psi);
  }
  return out;
}

GridFunction harmonic_analytic(const PhasePoint &z0, double epsilon, double t,
                               const SpatialGrid &grid, double s0) {
  if (z0.dim() != 1 || grid.dim() != 1)
    throw UnsupportedError("harmonic_analytic: closed form is one-dimensional");
  const double q0 = z0.q(0), p0 = z0.p(0);
  const double c = std::cos(t), s = std::sin(t);
  const double q = q0 * c + p0 * s;
  const double p = p0 * c - q0 * s;
  const double st = s0 - 0.5 * s * ((q0 * q0 - p0 * p0) * c + 2.0 * q0 * p0 * s);
  const double pref = std::pow(std::numbers::pi * epsilon, -0.25);
  GridFunction out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(0, static_cast<int>(i));
    const double y = x - q;
    out.values[i] = pref * std::exp(-y * y / (2.0 * epsilon) +
                                    I * (p * y / epsilon + st / epsilon - 0.5 * t));
  }
  return out;
}

GaussianWavePacket harmonic_exact(const GaussianWavePacket &u, double t) {
  const double c = std::cos(t), s = std::sin(t);
  const RVec &q0 = u.q();
  const RVec &p0 = u.p();
  const RVec q = q0 * c + p0 * s;
  const RVec p = p0 * c - q0 * s;
  const double sh =
      u.action() - 0.5 * s * ((q0.squaredNorm() - p0.squaredNorm()) * c + 2.0 * q0.dot(p0) * s);
  const CMat &cm = u.width().matrix();
  const int d = u.dim();
  const CMat id = CMat::Identity(d, d);
  // With C = P Q^{-1}: Q(t) = (cos t + C sin t) Q0, P(t) = (C cos t - sin t) Q0.
  const CMat a = c * id + s * cm;
  const SiegelMatrix width((c * cm - s * id) * linalg::checked_inverse(a, "harmonic_exact"));
  // Continuous arg det(cos t + C sin t) summed over eigenvalues of C: each
  // factor (cos t + c_j sin t) lies in the upper half plane for sin t > 0 and
  // flips sign every half period.
  Eigen::ComplexEigenSolver<CMat> es(cm, false);
  const double k = std::floor(t / std::numbers::pi);
  const double sign = std::fmod(std::abs(k), 2.0) == 0.0 ? 1.0 : -1.0;
  double phase = 0.0;
  for (int j = 0; j < d; ++j) {
    const cplx f = (c + es.eigenvalues()(j) * s) * sign;
    double ang = std::arg(f);
    if (ang < 0.0)
      ang = (ang < -0.5 * std::numbers::pi) ? ang + 2.0 * std::numbers::pi : 0.0;
    phase += k * std::numbers::pi + ang;
  }
  return GaussianWavePacket(u.epsilon(), {q, p}, width, sh - 0.5 * u.epsilon() * phase);
}

double l2_error(const GridFunction &a, const GridFunction &b, const std::vector<double> &lower,
                const std::vector<double> &upper) {
  if (!(a.grid == b.grid))
    throw ParameterError("l2_error: grid mismatch");
  const SpatialGrid &g = a.grid;
  const int d = g.dim();
  if (static_cast<int>(lower.size()) != d || static_cast<int>(upper.size()) != d)
    throw ParameterError("l2_error: domain dimension mismatch");
  // Index range inside the domain per axis, trapezoid weights on it.
  std::vector<int> lo(d), hi(d);
  for (int ax = 0; ax < d; ++ax) {
    const double h = g.spacing(ax);
    const double tol = 1e-9 * h;
    lo[ax] = std::max(0, static_cast<int>(std::ceil((lower[ax] - g.lower()[ax] - tol) / h)));
    hi[ax] = std::min(g.counts()[ax] - 1,
                      static_cast<int>(std::floor((upper[ax] - g.lower()[ax] + tol) / h)));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::size_t rest = i;
    double w = 1.0;
    bool inside = true;
    for (int ax = d - 1; ax >= 0; --ax) {
      const auto m = static_cast<std::size_t>(g.counts()[ax]);
      const int j = static_cast<int>(rest % m);
      rest /= m;
      if (j < lo[ax] || j > hi[ax]) {
        inside = false;
        break;
      }
      w *= g.spacing(ax) * ((j == lo[ax] || j == hi[ax]) && lo[ax] != hi[ax] ? 0.5 : 1.0);
    }
    if (inside)
      s += w * std::norm(a.values[i] - b.values[i]);
  }
  return std::sqrt(s);
}

double l2_error(const GridFunction &a, const GridFunction &b) {
  if (!(a.grid == b.grid))
    throw ParameterError("l2_error: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.grid.size(); ++i)
    s += a.grid.weight(i) * std::norm(a.values[i] - b.values[i]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------

ReferenceCache::ReferenceCache(std::string directory) : dir_(std::move(directory)) {}

std::uint64_t ReferenceCache::hash(const std::string &key) {
  std::uint64_t h = 1469598103934665603ull; // FNV-1a
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string ReferenceCache::path_for(const std::string &key) const {
  char name[40];
  std::snprintf(name, sizeof name, "ref_%016llx.bin", static_cast<unsigned long long>(hash(key)));
  return (std::filesystem::path(dir_) / name).string();
}

std::vector<GridFunction> ReferenceCache::get(const std::string &key, const GridFunction &psi0,
                                              const Potential &v, const SplitStepConfig &cfg,
                                              int n_steps, int record_every) {
  const std::string path = path_for(key);
  const std::size_t expected = static_cast<std::size_t>(n_steps / record_every) + 1 +
                               (n_steps % record_every != 0 ? 1 : 0);
  if (std::filesystem::exists(path)) {
    try {
      auto frames = load_trajectory(path, cfg.grid, cfg.epsilon);
      if (frames.size() == expected)
        return frames;
    } catch (const Error &) {
      // Stale or foreign file: recompute below.
    }
  }
  auto frames = split_step_propagate(psi0, v, cfg, n_steps, record_every);
  std::filesystem::create_directories(dir_);
  save_trajectory(path, frames, cfg.epsilon);
  return frames;
}

std::string reference_key(const std::string &potential_id, const SplitStepConfig &cfg,
                          const GaussianWavePacket &psi0, int n_steps, int record_every) {
  std::ostringstream s;
  s.precision(17);
  s << "v=" << potential_id << ";grid=";
  for (int a = 0; a < cfg.grid.dim(); ++a)
    s << cfg.grid.lower()[a] << ',' << cfg.grid.upper()[a] << ',' << cfg.grid.counts()[a] << ';';
  s << "dt=" << cfg.dt << ";eps=" << cfg.epsilon << ";q=" << psi0.q().transpose()
    << ";p=" << psi0.p().transpose() << ";C=" << psi0.width().matrix() << ";S=" << psi0.action()
    << ";n=" << n_steps << ";every=" << record_every;
  return s.str();
}

} // namespace tstg
