#pragma once

// Time-sliced thawed Gaussian propagation: expand psi0 in the frame, propagate
// every basis packet over one slice, re-expand, and concatenate slices through
// c^n = T c^{n-1}.

#include <functional>
#include <optional>
#include <vector>

#include "tstg/dynamics.hpp"
#include "tstg/frame.hpp"
#include "tstg/gwp.hpp"
#include "tstg/reference.hpp"

namespace tstg {

struct TstgRun {
  FrameSpec frame;
  Potential potential;
  PropagatorConfig propagator;
  int n_slices;
  GaussianWavePacket initial;
  // Grid over B_q for errors and observables.
  SpatialGrid grid;

  void validate() const;
};

struct SliceRecord {
  int n;
  double t;
  CoefficientTensor coeffs;
  double wall_time; // seconds since the start of the recursion
  double coeff_l1;
  double coeff_max;
};

struct SliceTensorOptions {
  // <= 0: dense tensor.
  double drop_tolerance = 0.0;
  bool compute_reexpansion_errors = true;
  bool compute_time_errors = true;
  // Proxy split-step settings for non-harmonic potentials; zero picks values
  // from the frame (dt = h / 10, grid covering B_q plus a margin).
  double proxy_dt = 0.0;
  int proxy_points = 0;
  double proxy_margin = 0.0;
};

struct SliceTensor {
  ReinitTensor tensor;
  std::vector<GaussianWavePacket> propagated;
  std::vector<double> reexpansion_error; // E_wp(u_k), empty if not computed
  std::vector<double> time_error;        // E_k, empty if not computed
  bool time_error_analytic = false;      // false: split-step proxy
  double build_seconds = 0.0;
};

SliceRecord initialize(const TstgRun &run);

// Propagation failures are rethrown with the offending grid index.
SliceTensor build_slice_tensor(const TstgRun &run, const SliceTensorOptions &options = {});

// Calls observer for n = 0..n_slices.
void run_tstg(const TstgRun &run, const ReinitTensor &tensor,
              const std::function<void(const SliceRecord &)> &observer);
// Records every record_every slices (and the last one).
std::vector<SliceRecord> run_tstg(const TstgRun &run, const ReinitTensor &tensor,
                                  int record_every = 1);

GridFunction synthesize_slice(const TstgRun &run, const SliceRecord &record,
                              const SpatialGrid &grid);

// m_k = <psi0(-x) | g_k>, so that G(t_n) = sum_k m_k c_k^n.
CVec survival_weights(const TstgRun &run);
cplx survival_amplitude(const TstgRun &run, const SliceRecord &record);
// int conj(psi0(-x)) psi(x) dx by grid quadrature.
cplx survival_amplitude_quadrature(const GaussianWavePacket &psi0, const GridFunction &psi);

// True iff V is exactly |x|^2 / 2.
bool is_standard_harmonic(const Potential &v);

struct EnergyResult {
  double energy;
  double imag_residual;
  double boundary_amplitude;
};

// <psi|H psi>/<psi|psi> with the kinetic part applied spectrally on a periodic
// grid. AccuracyError if |psi| exceeds boundary_tolerance on the boundary.
EnergyResult energy_expectation(const GridFunction &psi, const Potential &v, double epsilon,
                                double boundary_tolerance = 1e-8);

// e_n = E_wp(psi0) + sum_{l<n} sum_k |c_k^l| (E_k + E_wp(u_k)).
class ErrorBound {
public:
  ErrorBound(double initial_reexpansion_error, const std::vector<double> &time_error,
             const std::vector<double> &reexpansion_error);

  double value() const noexcept { return value_; }
  // Adds the local error of the slice starting from coefficients c^l.
  double add(const CoefficientTensor &c);

private:
  double value_;
  std::vector<double> local_;
};

// Series e_0 .. e_N for consecutive records n = 0..N.
std::vector<double> error_bound_series(double initial_reexpansion_error,
                                       const std::vector<double> &time_error,
                                       const std::vector<double> &reexpansion_error,
                                       const std::vector<SliceRecord> &records);

struct DecayFit {
  double gamma;
  double theta;
  bool all_below;
  std::size_t significant; // coefficients above the 1e-14 floor
};

// Gaussian envelope gamma exp(-(theta/8eps)|z_k - z0|^2): theta from the
// upper envelope of all coefficients above 1e-14, gamma from the largest
// decile. all_below reports whether 1.1 times the envelope dominates every
// coefficient above the floor.
DecayFit coefficient_decay_check(const SliceRecord &record, const PhasePoint &z0, double epsilon);

} // namespace tstg
