#pragma once

#include "ftcl/types.hpp"

namespace ftcl {

/// First-order regressor filter with pole C = c I.
struct FilterConfig {
  double c = 0.5;

  void validate() const;
};

/// Filter carrier at time k:
///   d(k+1) = c d(k) + z(k),   l(k+1) = c l(k) + c x(k),   d(0) = l(0) = 0.
/// ck_x0 tracks c^k x0 by repeated multiplication.
struct FilterState {
  long k = 0;
  Vector d;
  Vector l;
  Vector x0;
  Vector ck_x0;

  /// Zero-initialized state for regressor dimension p+q and initial state x0.
  static FilterState initial(Eigen::Index regressor_dim, const Vector& x0);
};

/// Filter signals divided by n_s = 1 + d'd + l'l.
struct NormalizedSample {
  Vector d_bar;
  Vector l_bar;
  Vector x_bar;
  /// c^k x0 / n_s, the normalized initial-condition term at this step.
  Vector ck_x0_bar;
  double n_s = 1.0;
};

/// Advances the filter by one step given z(k) = z(x(k), u(k)) and x(k).
FilterState filter_step(const FilterState& state, const FilterConfig& cfg, const Vector& z, const Vector& x);

/// Normalizes the filter output and the measured x(k) at the state's k.
NormalizedSample normalize(const FilterState& state, const Vector& x);

}  // namespace ftcl
