#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ftcl/filtering.hpp"
#include "ftcl/history.hpp"
#include "ftcl/types.hpp"

namespace ftcl {

enum class Method { GD, CL, FTCL1, FTCL2 };

std::string_view method_name(Method m);
/// Accepts "gd", "cl", "ftcl1", "ftcl2" (case-insensitive).
Method parse_method(std::string_view s);

/// Shared hyperparameter slots. Their meaning follows the method:
///   GD    gamma = gamma_G
///   CL    gamma = gamma_C, xi_G = sigma_G, xi_C = sigma_C
///   FTCL1 gamma, xi_G, xi_C, beta
///   FTCL2 gamma = gamma_bar, xi_G, xi_C (barred), gamma1
struct HyperParams {
  double gamma = 0.1;
  double xi_G = 1.0;
  double xi_C = 0.0;
  double beta = 1.0;
  double gamma1 = 0.5;
};

void validate(Method method, const HyperParams& hp);

struct EstimatorState {
  Method method = Method::GD;
  HyperParams hp;
  Matrix theta_hat;
  /// Concurrent terms are disabled until the stack is full and has rank.
  bool warmup_done = false;
  long k = 0;
};

/// Thrown when an update produces a non-finite parameter matrix.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(Method method, long step);
  Method method() const { return method_; }
  long step() const { return step_; }

 private:
  Method method_;
  long step_;
};

/// e(k) = theta_hat^T d_bar - l_bar + c^k x0_bar - x_bar.
Vector prediction_error(const Matrix& theta_hat, const NormalizedSample& sample, const Vector& ck_x0_bar);

/// e_h(k) for stored column h, evaluated with the current c^k x0_bar.
Vector stack_error(const Matrix& theta_hat, const HistoryStack& stack, int h, const Vector& ck_x0_bar);

std::vector<Vector> stack_errors(const Matrix& theta_hat, const HistoryStack& stack, const Vector& ck_x0_bar);

/// Component-wise |v|^g sign(v) with sign(0) = 0.
Vector power_sign(const Vector& v, double gamma1);

EstimatorState update_gd(const EstimatorState& st, const NormalizedSample& sample, const Vector& e);
EstimatorState update_cl(const EstimatorState& st, const NormalizedSample& sample, const HistoryStack& stack,
                         const Vector& e, const std::vector<Vector>& e_list);
EstimatorState update_ftcl1(const EstimatorState& st, const NormalizedSample& sample, const HistoryStack& stack,
                            const Vector& e, const std::vector<Vector>& e_list);
EstimatorState update_ftcl2(const EstimatorState& st, const NormalizedSample& sample, const HistoryStack& stack,
                            const Vector& e, const std::vector<Vector>& e_list);

/// Computes e and e_h from the sample and stack, then applies the method's law.
EstimatorState step(const EstimatorState& st, const NormalizedSample& sample, const HistoryStack& stack);

/// Largest admissible FTCL1 rate:
///   2 xi_C lam_min / (xi_G + xi_C lam_max (1 + 1/beta))^2.
double gamma_bound_ftcl1(double xi_G, double xi_C, double beta, double lam_min_S, double lam_max_S);

struct Ftcl2RateTerms {
  double A = 0.0;
  double B = 0.0;
  double bound() const { return A / B; }
};

/// FTCL2 admissibility terms with the rank-one current-data matrix bounded by
/// lam_min(D) = 0 and lam_max(D) = 1, which makes the bound time-invariant.
Ftcl2RateTerms ftcl2_rate_terms(double xi_G, double xi_C, double gamma1, int n, double lam_min_S, double lam_max_S);

double gamma_bound_ftcl2(double xi_G, double xi_C, double gamma1, int n, double lam_min_S, double lam_max_S);

/// gamma_C = 1 / (2 sigma_G + sigma_C lam_max(S)).
double gamma_c_rule(double sigma_G, double sigma_C, double lam_max_S);

}  // namespace ftcl
