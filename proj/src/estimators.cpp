#include "ftcl/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "ftcl/jacobi.hpp"

namespace ftcl {

namespace {

void require_positive(const char* name, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be positive and finite, got " + std::to_string(v));
  }
}

void require_spectrum(double lam_min, double lam_max) {
  if (!(lam_min > 0.0)) {
    throw std::domain_error("rank condition violated: lam_min(S) = " + std::to_string(lam_min));
  }
  if (!(lam_max >= lam_min)) {
    throw std::invalid_argument("lam_max(S) must be >= lam_min(S)");
  }
}

EstimatorState finish(const EstimatorState& st, Matrix theta) {
  if (!theta.allFinite()) throw DivergenceError(st.method, st.k);
  EstimatorState next = st;
  next.theta_hat = std::move(theta);
  next.k = st.k + 1;
  return next;
}

void require_errors(const HistoryStack& stack, const std::vector<Vector>& e_list) {
  if (static_cast<int>(e_list.size()) != stack.size()) {
    throw std::invalid_argument("stack error list has " + std::to_string(e_list.size()) + " entries, stack has " +
                                std::to_string(stack.size()));
  }
}

bool concurrent_active(const EstimatorState& st, const HistoryStack& stack) {
  return st.warmup_done && !stack.empty();
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::GD:
      return "GD";
    case Method::CL:
      return "CL";
    case Method::FTCL1:
      return "FTCL1";
    case Method::FTCL2:
      return "FTCL2";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "gd") return Method::GD;
  if (lower == "cl") return Method::CL;
  if (lower == "ftcl1") return Method::FTCL1;
  if (lower == "ftcl2") return Method::FTCL2;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

void validate(Method method, const HyperParams& hp) {
  require_positive("gamma", hp.gamma);
  if (method == Method::GD) return;
  require_positive("xi_G", hp.xi_G);
  if (!(hp.xi_C >= 0.0)) throw std::invalid_argument("xi_C must be non-negative");
  if (method == Method::FTCL1) require_positive("beta", hp.beta);
  if (method == Method::FTCL2 && !(hp.gamma1 > 0.0 && hp.gamma1 < 1.0)) {
    throw std::invalid_argument("gamma1 must lie in (0, 1), got " + std::to_string(hp.gamma1));
  }
}

DivergenceError::DivergenceError(Method method, long step)
    : std::runtime_error(std::string(method_name(method)) + " diverged at step " + std::to_string(step)),
      method_(method),
      step_(step) {}

Vector prediction_error(const Matrix& theta_hat, const NormalizedSample& sample, const Vector& ck_x0_bar) {
  return theta_hat.transpose() * sample.d_bar - sample.l_bar + ck_x0_bar - sample.x_bar;
}

Vector stack_error(const Matrix& theta_hat, const HistoryStack& stack, int h, const Vector& ck_x0_bar) {
  const StackColumn& col = stack.column(h);
  return theta_hat.transpose() * col.d_bar - col.l_bar + ck_x0_bar - col.x_bar;
}

std::vector<Vector> stack_errors(const Matrix& theta_hat, const HistoryStack& stack, const Vector& ck_x0_bar) {
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(stack.size()));
  for (int h = 0; h < stack.size(); ++h) out.push_back(stack_error(theta_hat, stack, h, ck_x0_bar));
  return out;
}

Vector power_sign(const Vector& v, double gamma1) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = v(i);
    out(i) = a == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(a), gamma1), a);
  }
  return out;
}

EstimatorState update_gd(const EstimatorState& st, const NormalizedSample& sample, const Vector& e) {
  return finish(st, st.theta_hat - st.hp.gamma * sample.d_bar * e.transpose());
}

EstimatorState update_cl(const EstimatorState& st, const NormalizedSample& sample, const HistoryStack& stack,
                         const Vector& e, const std::vector<Vector>& e_list) {
  Matrix direction = st.hp.xi_G * sample.d_bar * e.transpose();
  if (concurrent_active(st, stack)) {
    require_errors(stack, e_list);
    Matrix w = Matrix::Zero(st.theta_hat.rows(), st.theta_hat.cols());
    for (int h = 0; h < stack.size(); ++h) w += stack.column(h).d_bar * e_list[static_cast<size_t>(h)].transpose();
    direction += st.hp.xi_C * w;
  }
  return finish(st, st.theta_hat - st.hp.gamma * direction);
}

EstimatorState update_ftcl1(const EstimatorState& st, const NormalizedSample& sample, const HistoryStack& stack,
                            const Vector& e, const std::vector<Vector>& e_list) {
  Matrix direction = st.hp.xi_G * sample.d_bar * e.transpose();
  if (concurrent_active(st, stack)) {
    require_errors(stack, e_list);
    Matrix w = Matrix::Zero(st.theta_hat.rows(), st.theta_hat.cols());
    for (int h = 0; h < stack.size(); ++h) w += stack.column(h).d_bar * e_list[static_cast<size_t>(h)].transpose();
    direction += st.hp.xi_C * (w + w / (st.hp.beta + spectral_norm(w)));
  }
  return finish(st, st.theta_hat - st.hp.gamma * direction);
}

EstimatorState update_ftcl2(const EstimatorState& st, const NormalizedSample& sample, const HistoryStack& stack,
                            const Vector& e, const std::vector<Vector>& e_list) {
  const double g1 = st.hp.gamma1;
  if (!(g1 > 0.0 && g1 <= 1.0)) throw std::invalid_argument("gamma1 must lie in (0, 1]");
  Matrix direction = st.hp.xi_G * sample.d_bar * power_sign(e, g1).transpose();
  if (concurrent_active(st, stack)) {
    require_errors(stack, e_list);
    Matrix w = Matrix::Zero(st.theta_hat.rows(), st.theta_hat.cols());
    for (int h = 0; h < stack.size(); ++h) {
      w += stack.column(h).d_bar * power_sign(e_list[static_cast<size_t>(h)], g1).transpose();
    }
    direction += st.hp.xi_C * w;
  }
  return finish(st, st.theta_hat - st.hp.gamma * direction);
}

EstimatorState step(const EstimatorState& st, const NormalizedSample& sample, const HistoryStack& stack) {
  const Vector e = prediction_error(st.theta_hat, sample, sample.ck_x0_bar);
  if (st.method == Method::GD) return update_gd(st, sample, e);
  std::vector<Vector> e_list;
  if (concurrent_active(st, stack)) e_list = stack_errors(st.theta_hat, stack, sample.ck_x0_bar);
  switch (st.method) {
    case Method::CL:
      return update_cl(st, sample, stack, e, e_list);
    case Method::FTCL1:
      return update_ftcl1(st, sample, stack, e, e_list);
    case Method::FTCL2:
      return update_ftcl2(st, sample, stack, e, e_list);
    case Method::GD:
      break;
  }
  return update_gd(st, sample, e);
}

double gamma_bound_ftcl1(double xi_G, double xi_C, double beta, double lam_min_S, double lam_max_S) {
  require_spectrum(lam_min_S, lam_max_S);
  require_positive("beta", beta);
  const double den = xi_G + xi_C * lam_max_S * (1.0 + 1.0 / beta);
  return 2.0 * xi_C * lam_min_S / (den * den);
}

Ftcl2RateTerms ftcl2_rate_terms(double xi_G, double xi_C, double gamma1, int n, double lam_min_S, double lam_max_S) {
  require_spectrum(lam_min_S, lam_max_S);
  if (!(gamma1 > 0.0 && gamma1 <= 1.0)) throw std::invalid_argument("gamma1 must lie in (0, 1]");
  if (n < 1) throw std::invalid_argument("state dimension must be positive");
  const double half = 0.5 * (gamma1 + 1.0);
  const double n_pow = std::pow(static_cast<double>(n), 1.0 - gamma1);
  const double lmax_pow = std::pow(lam_max_S, half);
  Ftcl2RateTerms t;
  t.A = 2.0 * xi_C * std::pow(lam_min_S, half);
  t.B = xi_G * xi_G * n_pow + xi_C * xi_C * n_pow * lmax_pow + 2.0 * xi_C * xi_G * n_pow * lmax_pow;
  return t;
}

double gamma_bound_ftcl2(double xi_G, double xi_C, double gamma1, int n, double lam_min_S, double lam_max_S) {
  return ftcl2_rate_terms(xi_G, xi_C, gamma1, n, lam_min_S, lam_max_S).bound();
}

double gamma_c_rule(double sigma_G, double sigma_C, double lam_max_S) {
  const double den = 2.0 * sigma_G + sigma_C * lam_max_S;
  if (!(den > 0.0)) throw std::invalid_argument("gamma_C rule: denominator must be positive");
  return 1.0 / den;
}

}  // namespace ftcl
