#pragma once

// Experiment drivers behind the CLI commands. Each cmd_* writes its CSV and
// effective_config.json into out_dir and returns the written file names.
// The *_series functions compute the same rows in memory.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tstg/config.hpp"
#include "tstg/tstg.hpp"

namespace tstg {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct PropagateRow {
  int slice;
  double t;
  double l2_error; // NaN without a reference
  double error_bound; // NaN unless observables.bound
  double norm;
  double energy; // NaN if disabled or the boundary check failed
  cplx survival;
  double coeff_l1;
  double coeff_max;
  double ref_energy;
  cplx ref_survival;
};

struct PropagateResult {
  std::vector<PropagateRow> rows;
  std::string reference; // analytic | split_step | none
  double initial_reexpansion_error = 0.0;
  double max_reexpansion_error = 0.0;
  double max_time_error = 0.0;
  bool time_error_analytic = false;
  double max_column_sum = 0.0;
  std::size_t stored_entries = 0;
  double tensor_seconds = 0.0;
  double total_seconds = 0.0;
  std::vector<std::string> warnings;
  // Coefficients at the requested slices, in request order.
  std::vector<SliceRecord> kept;
  std::optional<ReinitTensor> tensor;
  std::optional<CoefficientTensor> final_coeffs;
};

// n_slices and the reference run from cfg; cache_dir empty disables caching.
PropagateResult propagate_series(const RunConfig &cfg, const std::string &cache_dir,
                                 const std::vector<int> &keep_slices = {});

struct ReconstructRow {
  int points_per_dim;
  double box_q;
  double box_p;
  double sup_error;
  double l2_error;
  double truncation_bound;
};

std::vector<ReconstructRow> reconstruct_series(const RunConfig &cfg);

struct ConvergenceRow {
  double value;
  double error;
  double fitted_order; // NaN on the first row
  double normalized_error; // error / h^2 or error / sqrt(eps)
};

std::vector<ConvergenceRow> convergence_series(const RunConfig &cfg);

std::vector<std::string> cmd_reconstruct(const RunConfig &cfg, const std::string &out_dir);
std::vector<std::string> cmd_propagate(const RunConfig &cfg, const std::string &out_dir);
std::vector<std::string> cmd_reference(const RunConfig &cfg, const std::string &out_dir);
std::vector<std::string> cmd_compare(const RunConfig &cfg, const std::string &out_dir);
std::vector<std::string> cmd_convergence(const RunConfig &cfg, const std::string &out_dir);

// Dispatches on cfg.experiment.
std::vector<std::string> run_experiment(const RunConfig &cfg, const std::string &out_dir);

struct SelfcheckReport {
  int checks = 0;
  std::vector<std::string> failures;
};

// Randomized property checks of the packet algebra and the frame.
SelfcheckReport selfcheck(std::uint64_t seed, int cases);

} // namespace tstg
