#include "tstg/linalg.hpp"

#include <cmath>
#include <string>

#include "tstg/error.hpp"

namespace tstg::linalg {

SpectralRange symmetric_range(const RMat &a) {
  Eigen::SelfAdjointEigenSolver<RMat> es(a, Eigen::EigenvaluesOnly);
  const auto &ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

RMat inverse_sqrt_spd(const RMat &a) {
  Eigen::SelfAdjointEigenSolver<RMat> es(a);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw DegeneracyError("inverse_sqrt_spd: matrix is not positive definite");
  const RVec s = es.eigenvalues().array().rsqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

cplx sqrt_det_right_half_plane(const CMat &a) {
  if (a.rows() == 1)
    return std::sqrt(a(0, 0));
  Eigen::ComplexEigenSolver<CMat> es(a, false);
  cplx out{1.0, 0.0};
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    out *= std::sqrt(es.eigenvalues()(i));
  return out;
}

double asymmetry(const CMat &a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

CMat checked_inverse(const CMat &a, const char *what) {
  if (a.rows() == 1) {
    const cplx v = a(0, 0);
    if (std::abs(v) < 1e-300 || !std::isfinite(std::abs(v)))
      throw DegeneracyError(std::string(what) + ": singular matrix");
    return CMat::Constant(1, 1, 1.0 / v);
  }
  Eigen::FullPivLU<CMat> lu(a);
  // Relative pivot threshold; anything smaller cannot be trusted in double.
  lu.setThreshold(1e-14);
  if (!lu.isInvertible())
    throw DegeneracyError(std::string(what) + ": singular matrix");
  return lu.inverse();
}

} // namespace tstg::linalg
