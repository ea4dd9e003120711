#pragma once

#include "tstg/types.hpp"

namespace tstg::linalg {

struct SpectralRange {
  double min;
  double max;
};

// Extreme eigenvalues of a real symmetric matrix.
SpectralRange symmetric_range(const RMat &a);

// Unique symmetric positive-definite inverse square root.
RMat inverse_sqrt_spd(const RMat &a);

// sqrt(det(A)) taken as the product of principal square roots of the
// eigenvalues. For A with positive-definite Hermitian part every eigenvalue
// lies in the right half plane, so this is the branch obtained by continuation
// from real positive-definite A.
cplx sqrt_det_right_half_plane(const CMat &a);

// max |A - A^T| entrywise.
double asymmetry(const CMat &a);

// Inverse via full-pivot LU; throws DegeneracyError if the matrix is singular
// to working precision.
CMat checked_inverse(const CMat &a, const char *what);

} // namespace tstg::linalg
