#include "tstg/tstg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <numbers>
#include <string>

#include <omp.h>

#include "tstg/error.hpp"
#include "tstg/fft.hpp"
#include "tstg/linalg.hpp"

namespace tstg {

void TstgRun::validate() const {
  propagator.validate();
  if (n_slices < 0)
    throw ParameterError("TstgRun: n_slices must be non-negative");
  if (initial.dim() != frame.dim() || potential.dim() != frame.dim() || grid.dim() != frame.dim())
    throw ParameterError("TstgRun: dimensions of frame, potential, initial state and grid differ");
  if (std::abs(initial.epsilon() - frame.epsilon()) > 1e-14 * frame.epsilon())
    throw ParameterError("TstgRun: initial state and frame use different epsilon");
  const auto lo = frame.position_lower();
  const auto hi = frame.position_upper();
  for (int a = 0; a < frame.dim(); ++a) {
    const double h = grid.spacing(a);
    const double top = grid.is_periodic() ? grid.upper()[a] : grid.upper()[a] + 0.5 * h;
    if (grid.lower()[a] > lo[a] + 1e-12 || top < hi[a] - 1e-12)
      throw ParameterError("TstgRun: observables grid does not cover the position box");
  }
}

SliceRecord initialize(const TstgRun &run) {
  run.validate();
  auto c = analyze(run.frame, run.initial);
  const double l1 = c.l1_norm(), mx = c.max_abs();
  return {0, 0.0, std::move(c), 0.0, l1, mx};
}

bool is_standard_harmonic(const Potential &v) {
  if (!v.is_polynomial())
    return false;
  const auto &terms = v.polynomial().terms();
  if (static_cast<int>(terms.size()) != v.dim())
    return false;
  for (const auto &t : terms) {
    if (t.coeff != 0.5)
      return false;
    int twos = 0, others = 0;
    for (int e : t.powers) {
      if (e == 2)
        ++twos;
      else if (e != 0)
        ++others;
    }
    if (twos != 1 || others != 0)
      return false;
  }
  return true;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs body(k) for k in [0, n) in parallel; rethrows the failure with the
// smallest index, prefixed with that index.
template <class Body>
void parallel_over_packets(std::size_t n, const char *what, Body body) {
  std::exception_ptr first;
  std::ptrdiff_t first_k = -1;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical(tstg_packet_error)
      {
        if (first_k < 0 || k < first_k) {
          first_k = k;
          first = std::current_exception();
        }
      }
    }
  }
  if (!first)
    return;
  const std::string prefix = std::string(what) + " failed for grid index " + std::to_string(first_k) + ": ";
  try {
    std::rethrow_exception(first);
  } catch (const IntegrationError &e) {
    throw IntegrationError(prefix + e.what());
  } catch (const AccuracyError &e) {
    throw AccuracyError(prefix + e.what());
  } catch (const ConsistencyError &e) {
    throw ConsistencyError(prefix + e.what());
  } catch (const DegeneracyError &e) {
    throw DegeneracyError(prefix + e.what());
  } catch (const UnsupportedError &e) {
    throw UnsupportedError(prefix + e.what());
  } catch (const ParameterError &e) {
    throw ParameterError(prefix + e.what());
  } catch (const std::exception &e) {
    throw Error(prefix + e.what());
  }
}

int next_power_of_two(int n) {
  int p = 1;
  while (p < n)
    p <<= 1;
  return p;
}

} // namespace

SliceTensor build_slice_tensor(const TstgRun &run, const SliceTensorOptions &options) {
  run.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const FrameSpec &frame = run.frame;
  const std::size_t k_total = frame.size();
  std::vector<std::optional<GaussianWavePacket>> slots(k_total);
  parallel_over_packets(k_total, "basis propagation", [&](std::size_t k) {
    slots[k] = propagate_packet(frame.basis(k), run.potential, run.propagator);
  });
  std::vector<GaussianWavePacket> propagated;
  propagated.reserve(k_total);
  for (auto &s : slots)
    propagated.push_back(std::move(*s));

  SliceTensor out{reinit_tensor(frame, propagated, options.drop_tolerance), std::move(propagated),
                  {}, {}, false, 0.0};

  if (options.compute_reexpansion_errors)
    out.reexpansion_error = reexpansion_errors(out.tensor, out.propagated, run.grid);

  if (options.compute_time_errors) {
    out.time_error.assign(k_total, 0.0);
    const double tau = run.propagator.tau;
    if (is_standard_harmonic(run.potential)) {
      out.time_error_analytic = true;
      parallel_over_packets(k_total, "analytic time error", [&](std::size_t k) {
        out.time_error[k] =
            packet_l2_distance(out.propagated[k], harmonic_exact(frame.basis(k), tau));
      });
    } else if (tau > 0.0) {
      if (frame.dim() != 1)
        throw UnsupportedError("build_slice_tensor: split-step proxy errors need d == 1");
      const double eps = frame.epsilon();
      const double sigma = std::sqrt(eps / (2.0 * frame.width().theta()));
      const double margin = options.proxy_margin > 0.0 ? options.proxy_margin : 12.0 * sigma;
      const double lo = frame.position_lower()[0] - margin;
      const double hi = frame.position_upper()[0] + margin;
      int npts = options.proxy_points;
      if (npts <= 0) {
        const double pmax = std::abs(frame.center().p(0)) + frame.half_widths()[1] +
                            10.0 * std::sqrt(eps * frame.width().big_theta());
        const double dx = 0.5 * std::numbers::pi * eps / pmax;
        npts = next_power_of_two(static_cast<int>(std::ceil((hi - lo) / dx)));
      }
      const double dt_req = options.proxy_dt > 0.0 ? options.proxy_dt : run.propagator.h / 10.0;
      const int steps = std::max(1, static_cast<int>(std::round(tau / dt_req)));
      SplitStepConfig cfg{SpatialGrid::periodic(lo, hi, npts), tau / steps, eps};
      std::vector<std::unique_ptr<SplitStepSolver>> solvers;
      for (int i = 0; i < omp_get_max_threads(); ++i)
        solvers.push_back(std::make_unique<SplitStepSolver>(cfg, run.potential));
      parallel_over_packets(k_total, "split-step time error", [&](std::size_t k) {
        auto &solver = *solvers[static_cast<std::size_t>(omp_get_thread_num())];
        auto psi = evaluate(frame.basis(k), cfg.grid);
        for (int s = 0; s < steps; ++s)
          solver.step(psi.values);
        out.time_error[k] = l2_error(psi, evaluate(out.propagated[k], cfg.grid));
      });
    }
  }
  out.build_seconds = seconds_since(t0);
  return out;
}

void run_tstg(const TstgRun &run, const ReinitTensor &tensor,
              const std::function<void(const SliceRecord &)> &observer) {
  if (!(tensor.spec() == run.frame))
    throw ParameterError("run_tstg: tensor was built for a different frame");
  const auto t0 = std::chrono::steady_clock::now();
  SliceRecord rec = initialize(run);
  observer(rec);
  for (int n = 1; n <= run.n_slices; ++n) {
    rec.coeffs = reinit_apply(tensor, rec.coeffs);
    rec.n = n;
    rec.t = n * run.propagator.tau;
    rec.wall_time = seconds_since(t0);
    rec.coeff_l1 = rec.coeffs.l1_norm();
    rec.coeff_max = rec.coeffs.max_abs();
    observer(rec);
  }
}

std::vector<SliceRecord> run_tstg(const TstgRun &run, const ReinitTensor &tensor,
                                  int record_every) {
  if (record_every < 1)
    throw ParameterError("run_tstg: record_every must be positive");
  std::vector<SliceRecord> out;
  run_tstg(run, tensor, [&](const SliceRecord &r) {
    if (r.n % record_every == 0 || r.n == run.n_slices)
      out.push_back(r);
  });
  return out;
}

GridFunction synthesize_slice(const TstgRun &run, const SliceRecord &record,
                              const SpatialGrid &grid) {
  return synthesize(run.frame, record.coeffs, grid);
}

CVec survival_weights(const TstgRun &run) {
  const GaussianWavePacket mirror = run.initial.mirrored();
  const FrameSpec &frame = run.frame;
  const OverlapKernel kernel(mirror.width(), frame.width(), frame.epsilon());
  const cplx phase = std::exp(-I * (mirror.action() / frame.epsilon()));
  const auto n = static_cast<Eigen::Index>(frame.size());
  CVec m(n);
  for (Eigen::Index k = 0; k < n; ++k)
    m(k) = phase * kernel.eval(mirror.q().data(), mirror.p().data(),
                               frame.q_points().col(k).data(), frame.p_points().col(k).data());
  return m;
}

cplx survival_amplitude(const TstgRun &run, const SliceRecord &record) {
  const CVec m = survival_weights(run);
  cplx s{0.0, 0.0};
  for (Eigen::Index k = 0; k < m.size(); ++k)
    s += m(k) * record.coeffs.values(k);
  return s;
}

cplx survival_amplitude_quadrature(const GaussianWavePacket &psi0, const GridFunction &psi) {
  return evaluate(psi0.mirrored(), psi.grid).inner(psi);
}

EnergyResult energy_expectation(const GridFunction &psi, const Potential &v, double epsilon,
                                double boundary_tolerance) {
  const SpatialGrid &g = psi.grid;
  if (!g.is_periodic())
    throw ParameterError("energy_expectation: spectral kinetic energy needs a periodic grid");
  if (v.dim() != g.dim())
    throw ParameterError("energy_expectation: potential and grid dimensions differ");
  const int d = g.dim();
  const std::size_t n = g.size();
  double boundary = 0.0;
  std::vector<double> xs(d);
  std::vector<std::vector<double>> k(d);
  for (int a = 0; a < d; ++a)
    k[a] = fft_wavenumbers(g.counts()[a], g.upper()[a] - g.lower()[a]);
  std::vector<cplx> hat = psi.values;
  Fft fft(g.counts());
  fft.forward(hat);
  for (std::size_t i = 0; i < n; ++i) {
    double k2 = 0.0;
    std::size_t rest = i;
    bool edge = false;
    for (int a = d - 1; a >= 0; --a) {
      const auto m = static_cast<std::size_t>(g.counts()[a]);
      const auto j = rest % m;
      rest /= m;
      k2 += k[a][j] * k[a][j];
      edge = edge || j == 0 || j == m - 1;
    }
    hat[i] *= 0.5 * epsilon * epsilon * k2 / static_cast<double>(n);
    if (edge)
      boundary = std::max(boundary, std::abs(psi.values[i]));
  }
  if (boundary > boundary_tolerance)
    throw AccuracyError("energy_expectation: |psi| = " + std::to_string(boundary) +
                        " on the boundary exceeds " + std::to_string(boundary_tolerance));
  fft.backward(hat);
  cplx num{0.0, 0.0};
  double den = 0.0;
  RVec x(d);
  for (std::size_t i = 0; i < n; ++i) {
    g.point(i, xs);
    for (int a = 0; a < d; ++a)
      x(a) = xs[a];
    const cplx hpsi = hat[i] + v.value(x) * psi.values[i];
    const double w = g.weight(i);
    num += w * std::conj(psi.values[i]) * hpsi;
    den += w * std::norm(psi.values[i]);
  }
  if (!(den > 0.0))
    throw AccuracyError("energy_expectation: zero state");
  return {num.real() / den, std::abs(num.imag()) / den, boundary};
}

ErrorBound::ErrorBound(double initial_reexpansion_error, const std::vector<double> &time_error,
                       const std::vector<double> &reexpansion_error)
    : value_(initial_reexpansion_error) {
  const std::size_t n = std::max(time_error.size(), reexpansion_error.size());
  if ((!time_error.empty() && time_error.size() != n) ||
      (!reexpansion_error.empty() && reexpansion_error.size() != n))
    throw ParameterError("ErrorBound: per-packet error arrays differ in length");
  local_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    local_[k] = (time_error.empty() ? 0.0 : time_error[k]) +
                (reexpansion_error.empty() ? 0.0 : reexpansion_error[k]);
}

double ErrorBound::add(const CoefficientTensor &c) {
  if (!local_.empty() && static_cast<std::size_t>(c.values.size()) != local_.size())
    throw ParameterError("ErrorBound: coefficient length does not match");
  double s = 0.0;
  for (std::size_t k = 0; k < local_.size(); ++k)
    s += std::abs(c.values(static_cast<Eigen::Index>(k))) * local_[k];
  value_ += s;
  return value_;
}

std::vector<double> error_bound_series(double initial_reexpansion_error,
                                       const std::vector<double> &time_error,
                                       const std::vector<double> &reexpansion_error,
                                       const std::vector<SliceRecord> &records) {
  ErrorBound bound(initial_reexpansion_error, time_error, reexpansion_error);
  std::vector<double> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].n != static_cast<int>(i))
      throw ParameterError("error_bound_series: records must be consecutive from slice 0");
    out.push_back(bound.value());
    bound.add(records[i].coeffs);
  }
  return out;
}

DecayFit coefficient_decay_check(const SliceRecord &record, const PhasePoint &z0, double epsilon) {
  const FrameSpec &frame = record.coeffs.spec;
  if (z0.dim() != frame.dim())
    throw ParameterError("coefficient_decay_check: dimension mismatch");
  constexpr double floor = 1e-14;
  struct Entry {
    double r2;
    double mag;
  };
  std::vector<Entry> sig;
  for (std::size_t k = 0; k < frame.size(); ++k) {
    const double mag = std::abs(record.coeffs.values(static_cast<Eigen::Index>(k)));
    if (mag <= floor)
      continue;
    const auto c = static_cast<Eigen::Index>(k);
    const double r2 = (frame.q_points().col(c) - z0.q).squaredNorm() +
                      (frame.p_points().col(c) - z0.p).squaredNorm();
    sig.push_back({r2, mag});
  }
  if (sig.empty())
    throw AccuracyError("coefficient_decay_check: every coefficient is below 1e-14");

  std::vector<Entry> top = sig;
  std::sort(top.begin(), top.end(), [](const Entry &a, const Entry &b) { return a.mag > b.mag; });
  const std::size_t ntop = std::min(top.size(), std::max<std::size_t>(3, (top.size() + 9) / 10));
  top.resize(ntop);

  // Upper envelope: the largest log|c| in each of 16 equal r^2 bins over all
  // significant coefficients; the rate comes from the outer half, where the
  // slowest direction sets the tail.
  double rmin = sig.front().r2, rmax = sig.front().r2;
  for (const auto &e : sig) {
    rmin = std::min(rmin, e.r2);
    rmax = std::max(rmax, e.r2);
  }
  constexpr int bins = 16;
  std::vector<double> best(bins, -1e300), where(bins, 0.0);
  const double width = (rmax - rmin) / bins;
  for (const auto &e : sig) {
    int b = width > 0.0 ? static_cast<int>((e.r2 - rmin) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    const double l = std::log(e.mag);
    if (l > best[b]) {
      best[b] = l;
      where[b] = e.r2;
    }
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  int first = bins / 2;
  if (std::count_if(best.begin() + first, best.end(), [](double l) { return l > -1e299; }) < 2)
    first = 0;
  for (int b = first; b < bins; ++b) {
    if (best[b] <= -1e299)
      continue;
    sx += where[b];
    sy += best[b];
    sxx += where[b] * where[b];
    sxy += where[b] * best[b];
    ++m;
  }
  double slope = 0.0;
  const double det = m * sxx - sx * sx;
  if (m >= 2 && det > 0.0)
    slope = (m * sxy - sx * sy) / det;
  const double theta = std::max(0.0, -8.0 * epsilon * slope);
  const double a = theta / (8.0 * epsilon);

  double gamma = 0.0;
  for (const auto &e : top)
    gamma = std::max(gamma, e.mag * std::exp(a * e.r2));
  bool all_below = true;
  for (const auto &e : sig)
    if (e.mag > 1.1 * gamma * std::exp(-a * e.r2)) {
      all_below = false;
      break;
    }
  return {gamma, theta, all_below, sig.size()};
}

} // namespace tstg
