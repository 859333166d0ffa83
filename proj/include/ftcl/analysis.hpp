#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ftcl/estimators.hpp"
#include "ftcl/types.hpp"

namespace ftcl {

/// Bounds on the approximation error eps(x,u) and its normalized, filtered
/// counterpart eps_bar(k). `known` is false when b_eps_bar is a guess.
struct NoiseModel {
  double b_eps = 0.0;
  double b_eps_bar = 0.0;
  bool known = true;
};

/// Settling-time step counts; saturate at kSaturated rather than overflow.
using StepCount = std::int64_t;
inline constexpr StepCount kSaturated = INT64_MAX;

struct Theorem1Constants {
  double a = 0.0;
  /// Linear coefficient of the attractivity quadratic.
  double b_u = 0.0;
  double c = 0.0;
  double a_gamma = 0.0;
  double b_gamma = 0.0;
  double eta = 1.0;
  double gamma = 0.0;
  double gamma_bound = 0.0;
  bool gamma_admissible = false;
};

struct Theorem2Constants {
  double A = 0.0;
  double B = 0.0;
  double a_prime = 0.0;
  double alpha_prime = 0.0;
  double b_prime = 0.0;
  double c_prime = 0.0;
  double gamma = 0.0;
  double gamma1 = 0.5;
  bool gamma_admissible = false;
};

struct BoundsReport {
  Method method = Method::FTCL1;
  bool gamma_admissible = false;
  double gamma = 0.0;
  double gamma_bound = 0.0;
  double V0 = 0.0;
  double theta0_norm = 0.0;
  double b_eps_bar = 0.0;
  /// Zero-MFAE settling time (K1* or its FTCL2 analogue); empty if the
  /// settling premises fail.
  std::optional<StepCount> k1_star;
  /// Attractivity radius for nonzero MFAE (0 when b_eps_bar = 0).
  double b_theta = 0.0;
  /// Settling time into the attractive set; empty when the bound is
  /// inconclusive (non-positive denominator).
  std::optional<StepCount> k2_star;
  std::optional<Theorem1Constants> t1;
  std::optional<Theorem2Constants> t2;
  std::vector<std::string> notes;

  /// Flat key=value block, one entry per line.
  std::string to_key_value(const std::string& prefix = "") const;
};

/// V = tr(theta_tilde^T theta_tilde) / gamma.
double lyapunov_V(const Matrix& theta_tilde, double gamma);

Theorem1Constants theorem1_constants(const HyperParams& hp, double lam_min_S, double lam_max_S, int P,
                                     double b_eps_bar, double eta);

/// FTCL2 constants with the conservative current-data spectrum of
/// ftcl2_rate_terms; hp.gamma plays gamma_bar.
Theorem2Constants theorem2_constants(const HyperParams& hp, double lam_min_S, double lam_max_S, int n, int P,
                                     double b_eps_bar);

/// Settling-time bound for Delta V <= -a V - b V^mu.
StepCount settling_time_lemma1(double V0, double a, double b, double mu);

/// Settling-time bound for Delta V <= -c min{V/c, V^alpha}.
StepCount settling_time_lemma2(double V0, double c, double alpha);

BoundsReport bounds_ftcl1(const Theorem1Constants& consts, double V0, double b_eps_bar, double theta0_norm);

BoundsReport bounds_ftcl2(const Theorem2Constants& consts, double V0, double b_eps_bar, double theta0_norm);

struct RootOptions {
  double lower = 1e-12;
  double rel_tol = 1e-12;
  int max_doublings = 60;
};

/// Positive root of -a' s^(gamma1+1) + b' s + c' = 0 by bisection; 0 when
/// b' = c' = 0.
double attractivity_root(double a_prime, double b_prime, double c_prime, double gamma1, const RootOptions& opts = {});

/// One post-update observation consumed by the decrease monitor.
struct DecreaseSample {
  long k = 0;
  double V_prev = 0.0;
  double V = 0.0;
  /// ||S theta_tilde(k-1)|| for the stack used in the update.
  double s_theta_norm = 0.0;
  double lam_min = 0.0;
  double lam_max = 0.0;
  bool warmup_done = false;
};

struct MonitorConfig {
  Method method = Method::FTCL1;
  HyperParams hp;
  int P = 1;
  int n = 1;
  double eta = 1.0;
  double b_eps_bar = 0.0;
  /// Steps with V(k-1) below this are numerically converged and skipped.
  double V_floor = 1e-20;
  /// Slack tolerance relative to V(k-1), absorbing roundoff in Delta V.
  double rel_tol = 1e-12;
};

struct Violation {
  long k = 0;
  /// Delta V minus the allowed decrease; positive means violated.
  double slack = 0.0;
};

struct MonitorResult {
  std::vector<Violation> violations;
  /// Steps where the (eta+1)||S theta_tilde|| >= beta + ||S theta_tilde|| + P b
  /// premise failed (FTCL1 only). Logged, not counted as violations.
  std::vector<long> eta_premise_failures;
  /// Steps skipped because gamma was not admissible for the stack in use.
  std::vector<long> inadmissible_steps;
  long checked = 0;
};

/// Checks the zero-MFAE Lyapunov decrease inequality step by step, using the
/// constants of the stack that was in effect for each update.
MonitorResult monitor_decrease(const std::vector<DecreaseSample>& run, const MonitorConfig& cfg);

}  // namespace ftcl
