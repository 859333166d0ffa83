#pragma once

#include <iosfwd>
#include <vector>

#include "ftcl/filtering.hpp"
#include "ftcl/jacobi.hpp"
#include "ftcl/types.hpp"

namespace ftcl {

struct StackColumn {
  Vector d_bar;
  Vector l_bar;
  Vector x_bar;
  long tau = 0;
};

struct HistoryOptions {
  /// A replacement must raise lam_min/lam_max by more than this relative amount.
  double selection_rel_tol = 1e-9;
  /// Rank holds when lam_min(S) > max(rank_rel_tol * lam_max(S), rank_abs_floor).
  double rank_rel_tol = 1e-10;
  double rank_abs_floor = 1e-14;
  JacobiOptions jacobi;
};

/// Memory stacks M, L, X with cached S = sum d_bar d_bar^T and its spectrum.
///
/// Recording has two phases. While fewer than `capacity` columns are stored
/// every sample is appended. Afterwards each candidate is tried in every slot
/// and the single swap that most increases lam_min(S)/lam_max(S) is kept; the
/// lowest slot index wins ties.
class HistoryStack {
 public:
  HistoryStack(int regressor_dim, int state_dim, int capacity, HistoryOptions opts = {});

  /// Returns true if the sample entered the stack.
  bool record(const NormalizedSample& sample, long k);

  bool rank_condition() const;
  bool full() const { return size() == capacity_; }
  int size() const { return static_cast<int>(columns_.size()); }
  bool empty() const { return columns_.empty(); }
  int capacity() const { return capacity_; }
  int regressor_dim() const { return regressor_dim_; }
  int state_dim() const { return state_dim_; }

  const std::vector<StackColumn>& columns() const { return columns_; }
  const StackColumn& column(int h) const;
  const Matrix& s() const { return s_; }
  double lam_min() const { return extremes_.lam_min; }
  double lam_max() const { return extremes_.lam_max; }
  /// lam_min/lam_max, 0 when S is zero.
  double ratio() const;

  /// S rebuilt from the stored columns (for cache-coherence checks).
  Matrix recompute_s() const;

  /// One row per column: tau, d_bar..., l_bar..., x_bar...
  void write_csv(std::ostream& out) const;

 private:
  double ratio_of(const Matrix& s) const;
  void refresh_spectrum();

  int regressor_dim_;
  int state_dim_;
  int capacity_;
  HistoryOptions opts_;
  std::vector<StackColumn> columns_;
  Matrix s_;
  EigExtremes extremes_;
};

/// Stack ratio lam_min/lam_max, or 0 for a zero spectrum.
double condition_ratio(const EigExtremes& e);

}  // namespace ftcl
