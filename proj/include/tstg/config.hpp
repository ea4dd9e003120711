#pragma once

// Run configuration: JSON text, every numeric field may also be a string
// expression over + - * / ( ), pi and sqrt(), e.g. "8*pi" or "-sqrt(2*1.3544)".
// Unknown keys are rejected. Errors carry the dotted field path and, where it
// can be located, the source line.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tstg/dynamics.hpp"
#include "tstg/frame.hpp"
#include "tstg/gwp.hpp"

namespace tstg {

using Interval = std::array<double, 2>;

struct RunConfig {
  std::string experiment = "propagate";
  double epsilon = 1.0;

  struct Frame {
    std::vector<Interval> q_box{{-8.0, 8.0}};
    std::vector<Interval> p_box{{-8.0, 8.0}};
    std::vector<int> counts{64, 32};
    cplx width{0.0, 4.0};
    double drop_tolerance = 0.0;
  } frame;

  struct PotentialSpec {
    std::string name = "harmonic"; // harmonic | double_well | free | polynomial
    double eta = 1.3544;
    std::vector<Monomial> terms;
  } potential;

  struct Propagator {
    std::string method = "variational";
    std::string integrator; // empty: implied by the method
    double tau = 0.1;
    double h = 1e-3;
    int n_slices = 100;
  } propagator;

  struct Initial {
    std::vector<double> q{1.0};
    std::vector<double> p{0.0};
    cplx width{0.0, 1.0};
    double action = 0.0;
  } initial;

  struct Observables {
    int every = 10;
    int grid_points = 256;
    double boundary_tolerance = 1e-8;
    bool energy = true;
    bool bound = true;
  } observables;

  struct Reference {
    std::string kind = "auto"; // auto | analytic | split_step | none
    double dt = 0.01;
    bool cache = true;
    std::string cache_dir; // empty: <out>/cache
  } reference;

  struct Output {
    bool save_tensor = false;
    bool save_coefficients = false;
  } output;

  struct Reconstruct {
    std::vector<Interval> boxes{{4.0, 4.0}, {6.0, 6.0}, {8.0, 8.0}}; // (b_q, b_p)
    std::vector<int> points{1, 2, 4, 8, 16, 32, 64, 128};
    int grid_points = 1024;
  } reconstruct;

  struct Convergence {
    std::string sweep = "h"; // h | epsilon
    std::vector<double> values{1e-2, 5e-3, 2.5e-3};
    double t = 1.0;
    double reference_h = 0.0; // h sweep: 0 picks min(values) / 16
    int reference_points = 0; // epsilon sweep split-step grid; 0 picks from epsilon
  } convergence;

  struct Compare {
    std::string reference = "split_step"; // split_step | self
  } compare;

  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(initial.q.size()); }

  // Derived library objects.
  Potential make_potential() const;
  PropagatorConfig make_propagator() const;
  FrameSpec make_frame() const;
  GaussianWavePacket make_initial() const;
  // Periodic grid over B_q with observables.grid_points per axis.
  SpatialGrid make_grid() const;
};

RunConfig load_config_file(const std::string &path);
// Cross-field checks applied by the loaders; usable after editing a config.
void validate_config(const RunConfig &cfg);
RunConfig load_config_string(const std::string &text);

// Effective configuration with all defaults, as JSON. Re-parsing it yields
// an identical RunConfig.
std::string to_json(const RunConfig &cfg);

// Numeric expression evaluator used for string-valued numbers.
double eval_expression(const std::string &text);

} // namespace tstg
