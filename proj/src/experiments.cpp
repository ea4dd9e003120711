#include "tstg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

#include "tstg/error.hpp"
#include "tstg/reference.hpp"
#include "tstg/serialize.hpp"

namespace tstg {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (std::isnan(v))
    return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
public:
  Csv(const std::string &path, std::initializer_list<const char *> header) : out_(path) {
    if (!out_)
      throw IoError("cannot open '" + path + "' for writing");
    bool first = true;
    for (const char *h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
  }

  Csv &cell(const std::string &s) {
    out_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }
  Csv &cell(double v) { return cell(num(v)); }
  Csv &cell(int v) { return cell(std::to_string(v)); }

  void end() {
    out_ << '\n';
    first_ = true;
  }

  void close(const std::string &path) {
    out_.flush();
    if (!out_)
      throw IoError("write to '" + path + "' failed");
  }

private:
  std::ofstream out_;
  bool first_ = true;
};

void prepare_out(const RunConfig &cfg, const std::string &out_dir) {
  fs::create_directories(out_dir);
  std::ofstream f(fs::path(out_dir) / "effective_config.json");
  f << to_json(cfg);
  if (!f)
    throw IoError("cannot write effective_config.json in '" + out_dir + "'");
}

TstgRun make_run(const RunConfig &cfg) {
  return {cfg.make_frame(),  cfg.make_potential(), cfg.make_propagator(),
          cfg.propagator.n_slices, cfg.make_initial(), cfg.make_grid()};
}

std::string potential_id(const RunConfig &cfg) {
  std::ostringstream s;
  s.precision(17);
  s << cfg.potential.name << ":eta=" << cfg.potential.eta;
  for (const auto &t : cfg.potential.terms) {
    s << ";" << t.coeff << "*";
    for (int e : t.powers)
      s << e << ',';
  }
  return s.str();
}

std::string resolve_reference(const RunConfig &cfg, const Potential &v) {
  if (cfg.reference.kind != "auto")
    return cfg.reference.kind;
  return is_standard_harmonic(v) ? "analytic" : "split_step";
}

std::vector<int> recorded_slices(int n_slices, int every) {
  std::vector<int> out;
  for (int n = 0; n <= n_slices; n += every)
    out.push_back(n);
  if (out.back() != n_slices)
    out.push_back(n_slices);
  return out;
}

bool is_coherent_state(const GaussianWavePacket &u) {
  return u.dim() == 1 && std::abs(u.width().matrix()(0, 0) - I) < 1e-15;
}

// Reference states at the recorded slices.
std::vector<GridFunction> reference_states(const RunConfig &cfg, const TstgRun &run,
                                           const std::string &kind,
                                           const std::string &cache_dir) {
  const auto slices = recorded_slices(run.n_slices, cfg.observables.every);
  const double tau = run.propagator.tau;
  std::vector<GridFunction> out;
  if (kind == "analytic") {
    for (int n : slices) {
      const double t = n * tau;
      if (is_coherent_state(run.initial))
        out.push_back(harmonic_analytic(run.initial.center(), run.initial.epsilon(), t, run.grid,
                                        run.initial.action()));
      else
        out.push_back(evaluate(harmonic_exact(run.initial, t), run.grid));
    }
    return out;
  }
  const int per_slice = static_cast<int>(std::lround(tau / cfg.reference.dt));
  SplitStepConfig ss{run.grid, tau / per_slice, run.frame.epsilon()};
  const int n_steps = run.n_slices * per_slice;
  const int every = cfg.observables.every * per_slice;
  const GridFunction psi0 = evaluate(run.initial, run.grid);
  if (n_steps == 0)
    return {psi0};
  if (!cache_dir.empty())
    return ReferenceCache(cache_dir)
        .get(reference_key(potential_id(cfg), ss, run.initial, n_steps, every), psi0,
             run.potential, ss, n_steps, every);
  return split_step_propagate(psi0, run.potential, ss, n_steps, every);
}

std::string cache_dir_for(const RunConfig &cfg, const std::string &out_dir) {
  if (!cfg.reference.cache)
    return "";
  if (!cfg.reference.cache_dir.empty())
    return cfg.reference.cache_dir;
  return (fs::path(out_dir) / "cache").string();
}

double energy_or_missing(const GridFunction &psi, const Potential &v, double eps, double tol,
                         std::vector<std::string> &warnings) {
  try {
    return energy_expectation(psi, v, eps, tol).energy;
  } catch (const AccuracyError &e) {
    if (warnings.size() < 20)
      warnings.emplace_back(e.what());
    return kMissing;
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_json(const std::string &path, const nlohmann::json &j) {
  std::ofstream f(path);
  f << j.dump(2) << '\n';
  if (!f)
    throw IoError("cannot write '" + path + "'");
}

double max_of(const std::vector<double> &v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

int next_power_of_two(int n) {
  int p = 1;
  while (p < n)
    p <<= 1;
  return p;
}

} // namespace

// ---------------------------------------------------------------------------

PropagateResult propagate_series(const RunConfig &cfg, const std::string &cache_dir,
                                 const std::vector<int> &keep_slices) {
  const auto t0 = std::chrono::steady_clock::now();
  const TstgRun run = make_run(cfg);
  run.validate();
  PropagateResult res;
  res.reference = resolve_reference(cfg, run.potential);

  SliceTensorOptions opt;
  opt.drop_tolerance = cfg.frame.drop_tolerance;
  opt.compute_reexpansion_errors = cfg.observables.bound;
  opt.compute_time_errors = cfg.observables.bound;
  SliceTensor st = build_slice_tensor(run, opt);
  res.tensor_seconds = st.build_seconds;
  res.max_reexpansion_error = max_of(st.reexpansion_error);
  res.max_time_error = max_of(st.time_error);
  res.time_error_analytic = st.time_error_analytic;
  res.max_column_sum = st.tensor.max_column_sum();
  res.stored_entries = st.tensor.stored_entries();
  if (cfg.observables.bound && !st.time_error_analytic)
    res.warnings.emplace_back("time errors E_k are split-step proxies");

  std::vector<GridFunction> ref;
  if (res.reference != "none")
    ref = reference_states(cfg, run, res.reference, cache_dir);

  const double eps = run.frame.epsilon();
  res.initial_reexpansion_error = reconstruction_error(run.frame, run.initial, run.grid, Norm::l2);
  ErrorBound bound(res.initial_reexpansion_error, st.time_error, st.reexpansion_error);
  const CVec m = survival_weights(run);
  const auto lo = run.frame.position_lower();
  const auto hi = run.frame.position_upper();
  std::size_t ref_index = 0;

  run_tstg(run, st.tensor, [&](const SliceRecord &rec) {
    const bool recorded = rec.n % cfg.observables.every == 0 || rec.n == run.n_slices;
    if (recorded) {
      const GridFunction psi = synthesize_slice(run, rec, run.grid);
      PropagateRow row{rec.n,
                       rec.t,
                       kMissing,
                       cfg.observables.bound ? bound.value() : kMissing,
                       psi.norm(),
                       kMissing,
                       m.cwiseProduct(rec.coeffs.values).sum(),
                       rec.coeff_l1,
                       rec.coeff_max,
                       kMissing,
                       {kMissing, kMissing}};
      if (cfg.observables.energy)
        row.energy = energy_or_missing(psi, run.potential, eps,
                                       cfg.observables.boundary_tolerance, res.warnings);
      if (!ref.empty()) {
        const GridFunction &r = ref[ref_index++];
        row.l2_error = l2_error(psi, r, lo, hi);
        row.ref_survival = survival_amplitude_quadrature(run.initial, r);
        if (cfg.observables.energy)
          row.ref_energy = energy_or_missing(r, run.potential, eps,
                                             cfg.observables.boundary_tolerance, res.warnings);
      }
      res.rows.push_back(row);
    }
    if (std::find(keep_slices.begin(), keep_slices.end(), rec.n) != keep_slices.end())
      res.kept.push_back(rec);
    if (rec.n == run.n_slices)
      res.final_coeffs = rec.coeffs;
    if (cfg.observables.bound)
      bound.add(rec.coeffs);
  });
  if (cfg.output.save_tensor)
    res.tensor = std::move(st.tensor);
  res.total_seconds = seconds_since(t0);
  return res;
}

std::vector<ReconstructRow> reconstruct_series(const RunConfig &cfg) {
  const int d = cfg.dim();
  const GaussianWavePacket psi = cfg.make_initial();
  const SiegelMatrix width = SiegelMatrix::scalar(cfg.frame.width, d);
  RVec q0(d), p0(d);
  for (int i = 0; i < d; ++i) {
    q0(i) = 0.5 * (cfg.frame.q_box[i][0] + cfg.frame.q_box[i][1]);
    p0(i) = 0.5 * (cfg.frame.p_box[i][0] + cfg.frame.p_box[i][1]);
  }
  const double theta = std::min(width.theta(), psi.width().theta());
  const double big_theta = std::max(width.big_theta(), psi.width().big_theta());
  std::vector<ReconstructRow> out;
  for (const auto &box : cfg.reconstruct.boxes) {
    std::vector<double> lo(d), hi(d);
    double b = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
      lo[i] = q0(i) - box[0];
      hi[i] = q0(i) + box[0];
      b = std::min({b, box[0] - std::abs(psi.q()(i) - q0(i)), box[1] - std::abs(psi.p()(i) - p0(i))});
    }
    const SpatialGrid grid(lo, hi, std::vector<int>(d, cfg.reconstruct.grid_points), false);
    const double tb = truncation_bound(std::max(b, 0.0), theta, big_theta, cfg.epsilon, d);
    for (int k : cfg.reconstruct.points) {
      std::vector<double> half(2 * d);
      for (int i = 0; i < d; ++i) {
        half[i] = box[0];
        half[d + i] = box[1];
      }
      const FrameSpec spec(cfg.epsilon, width, {q0, p0}, half, std::vector<int>(2 * d, k));
      const auto e = reconstruction_errors(spec, psi, grid);
      out.push_back({k, box[0], box[1], e.sup, e.l2, tb});
    }
  }
  return out;
}

namespace {

PropagatorConfig propagator_for(const RunConfig &cfg, double t, double h) {
  PropagatorConfig p = cfg.make_propagator();
  p.tau = t;
  p.h = h;
  p.validate();
  return p;
}

// Split-step reference for one packet over [0, t] on the B_q box.
GridFunction split_step_packet(const RunConfig &cfg, const GaussianWavePacket &u,
                               const Potential &v, double t) {
  if (u.dim() != 1)
    throw UnsupportedError("convergence: epsilon sweep reference is one-dimensional");
  const double eps = u.epsilon();
  const double lo = cfg.frame.q_box[0][0], hi = cfg.frame.q_box[0][1];
  int n = cfg.convergence.reference_points;
  if (n <= 0) {
    double vmin = std::numeric_limits<double>::infinity();
    RVec x(1);
    for (int i = 0; i <= 2000; ++i) {
      x(0) = lo + (hi - lo) * i / 2000.0;
      vmin = std::min(vmin, v.value(x));
    }
    const double e = 0.5 * u.p().squaredNorm() + v.value(u.q());
    const double pmax =
        std::sqrt(2.0 * std::max(0.0, e - vmin)) + 12.0 * std::sqrt(eps * u.width().big_theta());
    n = next_power_of_two(static_cast<int>(std::ceil((hi - lo) * pmax / (0.25 * std::numbers::pi * eps))));
  }
  const int steps = std::max(1, static_cast<int>(std::lround(t / cfg.reference.dt)));
  SplitStepConfig ss{SpatialGrid::periodic(lo, hi, n), t / steps, eps};
  const GridFunction psi0 = evaluate(u, ss.grid);
  return split_step_propagate(psi0, v, ss, steps, steps).back();
}

} // namespace

std::vector<ConvergenceRow> convergence_series(const RunConfig &cfg) {
  const Potential v = cfg.make_potential();
  const double t = cfg.convergence.t;
  std::vector<ConvergenceRow> out;
  const auto &values = cfg.convergence.values;
  if (cfg.convergence.sweep == "h") {
    const GaussianWavePacket u0 = cfg.make_initial();
    std::optional<GaussianWavePacket> ref;
    if (is_standard_harmonic(v)) {
      ref = harmonic_exact(u0, t);
    } else {
      double href = cfg.convergence.reference_h;
      if (href <= 0.0)
        href = *std::min_element(values.begin(), values.end()) / 16.0;
      ref = propagate_packet(u0, v, propagator_for(cfg, t, href));
    }
    for (double h : values) {
      const auto u = propagate_packet(u0, v, propagator_for(cfg, t, h));
      const double e = packet_l2_distance(u, *ref);
      out.push_back({h, e, kMissing, e / (h * h)});
    }
  } else {
    for (double eps : values) {
      RunConfig c = cfg;
      c.epsilon = eps;
      const GaussianWavePacket u0 = c.make_initial();
      const auto u = propagate_packet(u0, v, propagator_for(cfg, t, cfg.propagator.h));
      const GridFunction exact = split_step_packet(cfg, u0, v, t);
      const double e = l2_error(exact, evaluate(u, exact.grid));
      out.push_back({eps, e, kMissing, e / std::sqrt(eps)});
    }
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    out[i].fitted_order = std::log(out[i].error / out[i - 1].error) /
                          std::log(out[i].value / out[i - 1].value);
  return out;
}

// ---------------------------------------------------------------------------
// Commands

std::vector<std::string> cmd_reconstruct(const RunConfig &cfg, const std::string &out_dir) {
  prepare_out(cfg, out_dir);
  const auto rows = reconstruct_series(cfg);
  const std::string path = (fs::path(out_dir) / "reconstruct.csv").string();
  Csv csv(path, {"points_per_dim", "box_halfwidth_q", "box_halfwidth_p", "sup_error", "l2_error",
                 "truncation_bound"});
  for (const auto &r : rows) {
    csv.cell(r.points_per_dim).cell(r.box_q).cell(r.box_p).cell(r.sup_error).cell(r.l2_error);
    csv.cell(r.truncation_bound).end();
  }
  csv.close(path);
  return {"effective_config.json", "reconstruct.csv"};
}

std::vector<std::string> cmd_propagate(const RunConfig &cfg, const std::string &out_dir) {
  prepare_out(cfg, out_dir);
  const auto res = propagate_series(cfg, cache_dir_for(cfg, out_dir));
  std::vector<std::string> files{"effective_config.json", "tstg.csv", "diagnostics.json"};
  const std::string path = (fs::path(out_dir) / "tstg.csv").string();
  {
    Csv csv(path, {"slice", "t", "l2_error_vs_reference", "error_bound", "norm", "energy",
                   "survival_re", "survival_im", "coeff_l1", "coeff_max"});
    for (const auto &r : res.rows) {
      csv.cell(r.slice).cell(r.t).cell(r.l2_error).cell(r.error_bound).cell(r.norm);
      csv.cell(r.energy).cell(r.survival.real()).cell(r.survival.imag());
      csv.cell(r.coeff_l1).cell(r.coeff_max).end();
    }
    csv.close(path);
  }
  if (res.tensor) {
    save_reinit((fs::path(out_dir) / "tensor.bin").string(), *res.tensor);
    files.push_back("tensor.bin");
  }
  if (cfg.output.save_coefficients && res.final_coeffs) {
    save_coefficients((fs::path(out_dir) / "coefficients.bin").string(), *res.final_coeffs);
    files.push_back("coefficients.bin");
  }
  nlohmann::json diag = {
      {"reference", res.reference},
      {"initial_reexpansion_error", res.initial_reexpansion_error},
      {"max_reexpansion_error", res.max_reexpansion_error},
      {"max_time_error", res.max_time_error},
      {"time_error_kind", !cfg.observables.bound      ? "none"
                          : res.time_error_analytic ? "analytic"
                                                    : "split_step_proxy"},
      {"max_column_sum", res.max_column_sum},
      {"stored_entries", res.stored_entries},
      {"tensor_seconds", res.tensor_seconds},
      {"total_seconds", res.total_seconds},
      {"warnings", res.warnings},
  };
  write_json((fs::path(out_dir) / "diagnostics.json").string(), diag);
  return files;
}

std::vector<std::string> cmd_reference(const RunConfig &cfg, const std::string &out_dir) {
  prepare_out(cfg, out_dir);
  const TstgRun run = make_run(cfg);
  run.validate();
  const std::string kind = resolve_reference(cfg, run.potential);
  if (kind == "none")
    throw ConfigError("reference.kind", 0, "the reference command needs a reference solver");
  const auto states = reference_states(cfg, run, kind, cache_dir_for(cfg, out_dir));
  const auto slices = recorded_slices(run.n_slices, cfg.observables.every);
  const std::string path = (fs::path(out_dir) / "reference.csv").string();
  std::vector<std::string> warnings;
  Csv csv(path, {"slice", "t", "norm", "energy", "survival_re", "survival_im"});
  for (std::size_t i = 0; i < states.size(); ++i) {
    const cplx g = survival_amplitude_quadrature(run.initial, states[i]);
    csv.cell(slices[i]).cell(slices[i] * run.propagator.tau).cell(states[i].norm());
    csv.cell(cfg.observables.energy
                 ? energy_or_missing(states[i], run.potential, cfg.epsilon,
                                     cfg.observables.boundary_tolerance, warnings)
                 : kMissing);
    csv.cell(g.real()).cell(g.imag()).end();
  }
  csv.close(path);
  save_trajectory((fs::path(out_dir) / "reference.bin").string(), states, cfg.epsilon);
  return {"effective_config.json", "reference.csv", "reference.bin"};
}

std::vector<std::string> cmd_compare(const RunConfig &cfg, const std::string &out_dir) {
  prepare_out(cfg, out_dir);
  RunConfig c = cfg;
  c.observables.energy = true;
  const bool self = cfg.compare.reference == "self";
  c.reference.kind = self ? "none" : "split_step";
  const auto res = propagate_series(c, cache_dir_for(cfg, out_dir));
  const std::string path = (fs::path(out_dir) / "compare.csv").string();
  Csv csv(path, {"t", "tstg_energy", "ref_energy", "rel_energy_err", "tstg_survival_abs",
                 "ref_survival_abs"});
  for (const auto &r : res.rows) {
    const double re = self ? r.energy : r.ref_energy;
    const double rs = self ? std::abs(r.survival) : std::abs(r.ref_survival);
    csv.cell(r.t).cell(r.energy).cell(re).cell(std::abs(r.energy - re) / std::abs(re));
    csv.cell(std::abs(r.survival)).cell(rs).end();
  }
  csv.close(path);
  return {"effective_config.json", "compare.csv"};
}

std::vector<std::string> cmd_convergence(const RunConfig &cfg, const std::string &out_dir) {
  prepare_out(cfg, out_dir);
  const auto rows = convergence_series(cfg);
  const std::string path = (fs::path(out_dir) / "convergence.csv").string();
  Csv csv(path, {"sweep", "value", "error", "fitted_order", "normalized_error"});
  for (const auto &r : rows) {
    csv.cell(cfg.convergence.sweep).cell(r.value).cell(r.error).cell(r.fitted_order);
    csv.cell(r.normalized_error).end();
  }
  csv.close(path);
  return {"effective_config.json", "convergence.csv"};
}

std::vector<std::string> run_experiment(const RunConfig &cfg, const std::string &out_dir) {
  if (cfg.experiment == "reconstruct")
    return cmd_reconstruct(cfg, out_dir);
  if (cfg.experiment == "propagate")
    return cmd_propagate(cfg, out_dir);
  if (cfg.experiment == "reference")
    return cmd_reference(cfg, out_dir);
  if (cfg.experiment == "compare")
    return cmd_compare(cfg, out_dir);
  if (cfg.experiment == "convergence")
    return cmd_convergence(cfg, out_dir);
  throw ConfigError("experiment", 0, "unknown experiment '" + cfg.experiment + "'");
}

// ---------------------------------------------------------------------------

namespace {

GaussianWavePacket random_packet(std::mt19937_64 &rng, int d, double eps) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  RVec q(d), p(d);
  for (int i = 0; i < d; ++i) {
    q(i) = u(rng);
    p(i) = u(rng);
  }
  return GaussianWavePacket(eps, {q, p}, random_siegel(rng, d), u(rng));
}

} // namespace

SelfcheckReport selfcheck(std::uint64_t seed, int cases) {
  if (cases < 1)
    throw ParameterError("selfcheck: cases must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> eps_dist(0.1, 1.0);
  SelfcheckReport rep;
  auto check = [&](bool ok, const std::string &what, int i) {
    ++rep.checks;
    if (!ok)
      rep.failures.push_back(what + " (case " + std::to_string(i) + ")");
  };
  for (int i = 0; i < cases; ++i) {
    const int d = 1 + i % 2;
    const double eps = eps_dist(rng);
    const auto g1 = random_packet(rng, d, eps);
    const auto g2 = random_packet(rng, d, eps);
    const cplx a = inner_product(g1, g2);
    const cplx b = inner_product(g2, g1);
    check(std::abs(a - std::conj(b)) <= 1e-12 * std::max(1.0, std::abs(a)), "conjugate symmetry",
          i);
    check(std::abs(a) <= 1.0 + 1e-12, "Cauchy-Schwarz", i);
    check(std::abs(inner_product(g1, g1) - 1.0) <= 1e-12, "unit norm", i);
    const double th = std::min(g1.width().theta(), g2.width().theta());
    const double bth = std::max(g1.width().big_theta(), g2.width().big_theta());
    check(std::abs(a) <= overlap_bound(g1, g2, th, bth) * (1 + 1e-12), "overlap bound", i);
    const auto hp = to_hagedorn(g1.width());
    check(symplectic_residual(hp.Q, hp.P).max() <= 1e-10, "symplectic relations", i);
    check((from_hagedorn(hp.Q, hp.P).matrix() - g1.width().matrix()).cwiseAbs().maxCoeff() <= 1e-10,
          "Hagedorn round trip", i);
    const cplx f = inner_product(fourier_transform(g1), fourier_transform(g2));
    check(std::abs(f - a) <= 1e-8 * std::max(std::abs(a), 1e-300) + 1e-15, "Plancherel", i);
  }
  return rep;
}

} // namespace tstg
