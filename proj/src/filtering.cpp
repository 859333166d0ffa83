#include "ftcl/filtering.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ftcl {

void FilterConfig::validate() const {
  if (!(c > -1.0 && c < 1.0)) {
    throw std::invalid_argument("filter pole c must satisfy -1 < c < 1, got " + std::to_string(c));
  }
}

FilterState FilterState::initial(Eigen::Index regressor_dim, const Vector& x0) {
  return FilterState{0, Vector::Zero(regressor_dim), Vector::Zero(x0.size()), x0, x0};
}

FilterState filter_step(const FilterState& state, const FilterConfig& cfg, const Vector& z, const Vector& x) {
  if (z.size() != state.d.size() || x.size() != state.l.size()) {
    throw std::invalid_argument("filter_step: dimension mismatch (z " + std::to_string(z.size()) + " vs " +
                                std::to_string(state.d.size()) + ", x " + std::to_string(x.size()) + " vs " +
                                std::to_string(state.l.size()) + ")");
  }
  if (!z.allFinite() || !x.allFinite()) {
    throw std::domain_error("filter_step: non-finite input at k=" + std::to_string(state.k));
  }
  FilterState next;
  next.k = state.k + 1;
  next.d = cfg.c * state.d + z;
  next.l = cfg.c * state.l + cfg.c * x;
  next.x0 = state.x0;
  next.ck_x0 = cfg.c * state.ck_x0;
  return next;
}

NormalizedSample normalize(const FilterState& state, const Vector& x) {
  const double n_s = 1.0 + state.d.squaredNorm() + state.l.squaredNorm();
  return NormalizedSample{state.d / n_s, state.l / n_s, x / n_s, state.ck_x0 / n_s, n_s};
}

}  // namespace ftcl
