#pragma once

// Potentials, Gaussian expectation values and thawed Gaussian propagation in
// Hagedorn's parametrization (q, p, Q, P, S).

#include <functional>
#include <string>
#include <vector>

#include "tstg/gwp.hpp"

namespace tstg {

struct Monomial {
  double coeff;
  std::vector<int> powers; // one exponent per dimension
};

class Polynomial {
public:
  Polynomial() = default;
  Polynomial(int dim, std::vector<Monomial> terms);

  int dim() const noexcept { return dim_; }
  int degree() const noexcept;
  const std::vector<Monomial> &terms() const noexcept { return terms_; }

  double operator()(const RVec &x) const;
  Polynomial derivative(int axis) const;

private:
  int dim_ = 0;
  std::vector<Monomial> terms_;
};

class Potential {
public:
  using ValueFn = std::function<double(const RVec &)>;
  using GradFn = std::function<RVec(const RVec &)>;
  using HessFn = std::function<RMat(const RVec &)>;

  explicit Potential(Polynomial poly, std::string name = "polynomial");
  Potential(int dim, ValueFn value, GradFn grad, HessFn hess, std::string name = "callable");

  // x^2/2 in every direction
  static Potential harmonic(int dim = 1);
  // x^4/(16 eta) - x^2/2
  static Potential double_well(double eta = 1.3544);
  static Potential free(int dim = 1);

  int dim() const noexcept { return dim_; }
  const std::string &name() const noexcept { return name_; }
  bool is_polynomial() const noexcept { return poly_; }
  bool is_quadratic() const noexcept { return quadratic_; }
  // Only meaningful for polynomial potentials.
  const Polynomial &polynomial() const noexcept { return value_; }

  double value(const RVec &q) const;
  RVec gradient(const RVec &q) const;
  RMat hessian(const RVec &q) const;

private:
  int dim_;
  std::string name_;
  bool poly_;
  bool quadratic_;
  Polynomial value_;
  std::vector<Polynomial> grad_;
  std::vector<Polynomial> hess_; // row-major d x d
  ValueFn fv_;
  GradFn fg_;
  HessFn fh_;
};

// Max relative deviation of gradient/Hessian from central differences of
// value/gradient at the given probe points.
double derivative_consistency(const Potential &v, const std::vector<RVec> &probes,
                              double step = 1e-4);

struct Expectations {
  double value;
  RVec gradient;
  RMat hessian;
};

// <V>, <grad V>, <hess V> under the Gaussian density with mean q and
// covariance sigma. Exact moments for polynomials; tensor Gauss-Hermite
// (order 20 per axis) for callables when allow_quadrature is set.
Expectations gaussian_expectations(const Potential &v, const RVec &q, const RMat &sigma,
                                   bool allow_quadrature = false);
// Same for |u|^2: mean q, covariance (eps/2) (Im C)^{-1}.
Expectations gaussian_expectations(const GaussianWavePacket &u, const Potential &v,
                                   bool allow_quadrature = false);

// Gauss-Hermite nodes and weights for int exp(-x^2) f(x) dx.
void gauss_hermite(int order, std::vector<double> &nodes, std::vector<double> &weights);

struct HagedornState {
  double t = 0.0;
  RVec q;
  RVec p;
  CMat Q;
  CMat P;
  double S = 0.0;

  int dim() const noexcept { return static_cast<int>(q.size()); }
  SymplecticResidual residual() const { return symplectic_residual(Q, P); }
  SiegelMatrix width() const { return from_hagedorn(Q, P); }
};

HagedornState hagedorn_state(const GaussianWavePacket &u);

struct StateDerivative {
  RVec q;
  RVec p;
  CMat Q;
  CMat P;
  double S;
};

StateDerivative rhs_variational(const HagedornState &s, const Potential &v, double epsilon,
                                bool allow_quadrature = false);
StateDerivative rhs_nonvariational(const HagedornState &s, const Potential &v);

enum class Method { variational, nonvariational };
enum class Integrator { variational_splitting, stoermer_verlet };

struct PropagatorConfig {
  Method method = Method::variational;
  Integrator integrator = Integrator::variational_splitting;
  double tau = 0.1;
  double h = 1e-3;
  bool allow_quadrature = false;

  // tau / h rounded; throws ParameterError unless m h == tau within 1e-12
  // and the method/integrator pair is consistent.
  int steps() const;
  void validate() const;
};

// Kick-drift-kick with point evaluations at q_n and q_{n+1}.
HagedornState step_stoermer_verlet(const HagedornState &s, const Potential &v, double h);
// Kick-drift-kick with Gaussian expectations (Faou-Lubich splitting).
HagedornState step_variational_splitting(const HagedornState &s, const Potential &v,
                                         double epsilon, double h, bool allow_quadrature = false);

struct Trajectory {
  HagedornState state;
  // Continuous argument of det Q accumulated along the steps.
  double det_phase;
};

// m steps; invariants are checked every 100 steps and at the end, residual
// above 1e-6 raises IntegrationError.
Trajectory propagate_state(const HagedornState &s0, const Potential &v, double epsilon,
                           const PropagatorConfig &config);

// Packet -> Hagedorn state -> m steps -> packet. The returned action folds in
// the phase of det(Q)^{-1/2}.
GaussianWavePacket propagate_packet(const GaussianWavePacket &u, const Potential &v,
                                    const PropagatorConfig &config);

} // namespace tstg
