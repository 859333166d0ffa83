#pragma once

#include "ftcl/types.hpp"

namespace ftcl {

struct EigExtremes {
  double lam_min = 0.0;
  double lam_max = 0.0;
};

struct JacobiOptions {
  /// Sweeps stop once the off-diagonal Frobenius norm drops below
  /// rel_tol * ||S||_F.
  double rel_tol = 1e-12;
  /// Maximum allowed |S - S^T| entry before the input is rejected.
  double symmetry_tol = 1e-9;
  int max_sweeps = 100;
};

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Throws std::invalid_argument for non-square or asymmetric input.
Vector jacobi_eigenvalues(const Matrix& s, const JacobiOptions& opts = {});

EigExtremes eig_extremes(const Matrix& s, const JacobiOptions& opts = {});

/// Induced 2-norm (largest singular value), sqrt(lam_max(W^T W)).
double spectral_norm(const Matrix& w);

}  // namespace ftcl
