#pragma once

#include "projlab/types.hpp"

namespace projlab {

/// Largest absolute eigenvalue of a symmetric matrix.
///
/// The input is symmetrized as (m + m')/2 first. Uses Lanczos with full
/// reorthogonalization from a fixed pseudo-random start vector; converged when
/// the Ritz residual of the extreme pair is at most tol * |theta|. Throws
/// NumericalError carrying the current bracket if the iteration cap is hit.
double spectral_norm(const Matrix& m, double tol = 1e-10);

}  // namespace projlab
