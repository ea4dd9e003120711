#pragma once

// Independent reference computations for the tests: composite Simpson
// quadrature, naive DFT, finite differences and closed-form Gaussian facts.
// Nothing here calls the analytic formulas under test.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// Composite Simpson on [a, b] with n intervals (n made even).
template <class T, class F>
T simpson(F f, double a, double b, int n) {
  if (n % 2)
    ++n;
  const double h = (b - a) / n;
  T s = f(a) + f(b);
  for (int i = 1; i < n; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * (h / 3.0);
}

// Tensor-product Simpson on [a0,b0] x [a1,b1].
template <class T, class F>
T simpson2(F f, double a0, double b0, double a1, double b1, int n) {
  if (n % 2)
    ++n;
  const double h0 = (b0 - a0) / n, h1 = (b1 - a1) / n;
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i)
    w[i] = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  T s{};
  for (int i = 0; i <= n; ++i) {
    T row{};
    const double x = a0 + i * h0;
    for (int j = 0; j <= n; ++j)
      row += w[j] * f(x, a1 + j * h1);
    s += w[i] * row;
  }
  return s * (h0 * h1 / 9.0);
}

// Direct 1D packet formula, written out independently of the library.
inline cplx packet1d(double eps, double q, double p, cplx c, double s, double x) {
  const double pref = std::pow(std::numbers::pi * eps, -0.25) * std::pow(c.imag(), 0.25);
  const double y = x - q;
  return pref * std::exp(cplx(0, 1) / eps * (0.5 * c * y * y + p * y + s));
}

// Naive DFT: F(xi_m) = (2 pi eps)^{-1/2} sum_j f(x_j) exp(-i xi_m x_j / eps) dx.
inline std::vector<cplx> eps_fourier(const std::vector<cplx> &f, double x0, double dx,
                                     const std::vector<double> &xi, double eps) {
  std::vector<cplx> out(xi.size());
  for (std::size_t m = 0; m < xi.size(); ++m) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
      s += f[j] * std::exp(cplx(0, -1) * xi[m] * (x0 + j * dx) / eps);
    out[m] = s * dx / std::sqrt(2.0 * std::numbers::pi * eps);
  }
  return out;
}

inline double central_difference(const std::function<double(double)> &f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Slope of the least-squares line through (x, y).
inline double ls_slope(const std::vector<double> &x, const std::vector<double> &y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace oracle
