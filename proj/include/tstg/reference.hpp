#pragma once

// Ground-truth solvers: Strang split-step Fourier on a periodic grid and the
// closed-form harmonic oscillator flow.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tstg/dynamics.hpp"
#include "tstg/fft.hpp"
#include "tstg/gwp.hpp"

namespace tstg {

struct SplitStepConfig {
  SpatialGrid grid;
  double dt;
  double epsilon;
  // Largest |psi| allowed on the outermost grid points.
  double leakage_tolerance = 1e-6;
  bool require_power_of_two = true;

  void validate() const;
};

class SplitStepSolver {
public:
  SplitStepSolver(SplitStepConfig cfg, const Potential &v);

  const SplitStepConfig &config() const noexcept { return cfg_; }

  // One Strang step in place; throws AccuracyError on boundary leakage.
  void step(std::vector<cplx> &psi);
  double boundary_amplitude(const std::vector<cplx> &psi) const;

private:
  SplitStepConfig cfg_;
  std::unique_ptr<Fft> fft_;
  std::vector<cplx> half_potential_;
  std::vector<cplx> kinetic_;
};

// States after 0, record_every, 2 record_every, ... steps (n_steps included).
std::vector<GridFunction> split_step_propagate(const GridFunction &psi0, const Potential &v,
                                               const SplitStepConfig &cfg, int n_steps,
                                               int record_every = 1);

// Closed-form coherent-state solution for V = x^2/2 from C0 = i, including
// the exp(-i t / 2) phase.
GridFunction harmonic_analytic(const PhasePoint &z0, double epsilon, double t,
                               const SpatialGrid &grid, double s0 = 0.0);

// Exact V = |x|^2/2 flow of an arbitrary packet, returned as a packet.
GaussianWavePacket harmonic_exact(const GaussianWavePacket &u, double t);

// Trapezoidal sqrt(int_domain |a-b|^2) over the grid points inside the box.
double l2_error(const GridFunction &a, const GridFunction &b, const std::vector<double> &lower,
                const std::vector<double> &upper);
double l2_error(const GridFunction &a, const GridFunction &b);

// Disk cache of grid trajectories keyed by a parameter string.
class ReferenceCache {
public:
  explicit ReferenceCache(std::string directory);

  static std::uint64_t hash(const std::string &key);
  std::string path_for(const std::string &key) const;

  // Loads frames for `key` or computes and stores them.
  std::vector<GridFunction> get(const std::string &key, const GridFunction &psi0,
                                const Potential &v, const SplitStepConfig &cfg, int n_steps,
                                int record_every);

private:
  std::string dir_;
};

// Canonical cache key for a split-step run.
std::string reference_key(const std::string &potential_id, const SplitStepConfig &cfg,
                          const GaussianWavePacket &psi0, int n_steps, int record_every);

} // namespace tstg
