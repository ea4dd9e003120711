#pragma once

#include <complex>

#include <Eigen/Dense>

namespace tstg {

using cplx = std::complex<double>;

using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx I{0.0, 1.0};

} // namespace tstg
