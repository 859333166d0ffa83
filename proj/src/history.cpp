#include "ftcl/history.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ftcl/csv.hpp"

namespace ftcl {

double condition_ratio(const EigExtremes& e) {
  if (!(e.lam_max > 0.0)) return 0.0;
  return std::max(0.0, e.lam_min) / e.lam_max;
}

HistoryStack::HistoryStack(int regressor_dim, int state_dim, int capacity, HistoryOptions opts)
    : regressor_dim_(regressor_dim),
      state_dim_(state_dim),
      capacity_(capacity),
      opts_(opts),
      s_(Matrix::Zero(regressor_dim, regressor_dim)) {
  if (regressor_dim < 1 || state_dim < 1) {
    throw std::invalid_argument("history: dimensions must be positive");
  }
  if (capacity < regressor_dim) {
    throw std::invalid_argument("history: capacity P=" + std::to_string(capacity) + " must be at least p+q=" +
                                std::to_string(regressor_dim));
  }
  columns_.reserve(static_cast<size_t>(capacity));
}

const StackColumn& HistoryStack::column(int h) const {
  if (h < 0 || h >= size()) {
    throw std::out_of_range("history: column " + std::to_string(h) + " out of range (size " +
                            std::to_string(size()) + ")");
  }
  return columns_[static_cast<size_t>(h)];
}

double HistoryStack::ratio() const { return condition_ratio(extremes_); }

double HistoryStack::ratio_of(const Matrix& s) const { return condition_ratio(eig_extremes(s, opts_.jacobi)); }

void HistoryStack::refresh_spectrum() { extremes_ = eig_extremes(s_, opts_.jacobi); }

bool HistoryStack::record(const NormalizedSample& sample, long k) {
  if (sample.d_bar.size() != regressor_dim_ || sample.l_bar.size() != state_dim_ ||
      sample.x_bar.size() != state_dim_) {
    throw std::invalid_argument("history: sample dimension mismatch (d_bar " + std::to_string(sample.d_bar.size()) +
                                ", expected " + std::to_string(regressor_dim_) + ")");
  }
  StackColumn candidate{sample.d_bar, sample.l_bar, sample.x_bar, k};
  const Matrix outer = sample.d_bar * sample.d_bar.transpose();

  if (!full()) {
    columns_.push_back(std::move(candidate));
    s_ += outer;
    refresh_spectrum();
    return true;
  }

  const double current = ratio();
  const double threshold = current + opts_.selection_rel_tol * current;
  double best_ratio = current;
  int best_slot = -1;
  for (int j = 0; j < capacity_; ++j) {
    const Vector& old = columns_[static_cast<size_t>(j)].d_bar;
    const Matrix trial = s_ - old * old.transpose() + outer;
    const double r = ratio_of(trial);
    // Strict comparison keeps the lowest slot on ties.
    if (r > threshold && r > best_ratio) {
      best_ratio = r;
      best_slot = j;
    }
  }
  if (best_slot < 0) return false;

  columns_[static_cast<size_t>(best_slot)] = std::move(candidate);
  // Rebuild rather than downdate so S never accumulates cancellation error.
  s_ = recompute_s();
  refresh_spectrum();
  return true;
}

bool HistoryStack::rank_condition() const {
  if (empty()) return false;
  const double tol = std::max(opts_.rank_rel_tol * extremes_.lam_max, opts_.rank_abs_floor);
  return extremes_.lam_min > tol;
}

Matrix HistoryStack::recompute_s() const {
  Matrix s = Matrix::Zero(regressor_dim_, regressor_dim_);
  for (const auto& c : columns_) s += c.d_bar * c.d_bar.transpose();
  return s;
}

void HistoryStack::write_csv(std::ostream& out) const {
  out << "tau";
  for (int i = 0; i < regressor_dim_; ++i) out << ",d" << i;
  for (int i = 0; i < state_dim_; ++i) out << ",l" << i;
  for (int i = 0; i < state_dim_; ++i) out << ",x" << i;
  out << '\n';
  for (const auto& c : columns_) {
    out << c.tau;
    for (Eigen::Index i = 0; i < c.d_bar.size(); ++i) out << ',' << format_double(c.d_bar(i));
    for (Eigen::Index i = 0; i < c.l_bar.size(); ++i) out << ',' << format_double(c.l_bar(i));
    for (Eigen::Index i = 0; i < c.x_bar.size(); ++i) out << ',' << format_double(c.x_bar(i));
    out << '\n';
  }
}

}  // namespace ftcl
