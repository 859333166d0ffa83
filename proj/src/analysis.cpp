#include "ftcl/analysis.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ftcl/csv.hpp"

namespace ftcl {

namespace {

StepCount floor_plus_one(double q) {
  if (!(q >= 0.0)) return 1;
  const double k = std::floor(q) + 1.0;
  if (k >= 9.2e18) return kSaturated;
  return static_cast<StepCount>(k);
}

void require_spectrum(double lam_min, double lam_max) {
  if (!(lam_min > 0.0)) {
    throw std::domain_error("rank condition violated: lam_min(S) = " + std::to_string(lam_min));
  }
  if (!(lam_max >= lam_min)) throw std::invalid_argument("lam_max(S) must be >= lam_min(S)");
}

}  // namespace

double lyapunov_V(const Matrix& theta_tilde, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("lyapunov_V: gamma must be positive");
  return theta_tilde.squaredNorm() / gamma;
}

Theorem1Constants theorem1_constants(const HyperParams& hp, double lam_min_S, double lam_max_S, int P,
                                     double b_eps_bar, double eta) {
  require_spectrum(lam_min_S, lam_max_S);
  if (!(hp.gamma > 0.0) || !(hp.beta > 0.0) || !(eta > 0.0) || P < 1 || !(b_eps_bar >= 0.0)) {
    throw std::invalid_argument("theorem1_constants: invalid parameters");
  }
  const double g = hp.gamma;
  const double xg = hp.xi_G;
  const double xc = hp.xi_C;
  const double beta = hp.beta;
  const double lmin = lam_min_S;
  const double lmax = lam_max_S;
  const double b = b_eps_bar;
  const double Pd = static_cast<double>(P);
  const double inv_beta = 1.0 / beta;
  const double ratio = lmin / lmax;

  Theorem1Constants t;
  t.eta = eta;
  t.gamma = g;
  t.a = -2.0 * xc * lmin + xg * xg * g + 2.0 * g * xg * xc * lmax * (inv_beta + 1.0) +
        g * xc * xc * lmax * lmax * (1.0 + inv_beta) * (1.0 + inv_beta);
  t.b_u = -2.0 * xc / (eta + 1.0) * ratio +
          2.0 * b *
              (xc * g * lmax * (xg + xc * Pd * (1.0 + inv_beta * inv_beta)) + xc * Pd * (g * xg + 1.0) + xg +
               g * xg * xg);
  t.c = b * (2.0 * xc * Pd / lmin +
             g * (xg * xg * b + 2.0 * xc * xg +
                  Pd * (2.0 * xc * xg * b + xc * xc * Pd * b + 2.0 * xc * xc + 2.0 * xc * xc * lmax / lmin +
                        2.0 * xg * xc / lmin + xc * xc * Pd * b * inv_beta * inv_beta)));
  t.a_gamma = -g * t.a;
  t.b_gamma = 2.0 * std::sqrt(g) * xc / (eta + 1.0) * ratio;
  t.gamma_bound = gamma_bound_ftcl1(xg, xc, beta, lmin, lmax);
  t.gamma_admissible = g < t.gamma_bound;
  if (t.gamma_admissible && !(t.a_gamma < 1.0)) throw std::logic_error("theorem1_constants: a_gamma >= 1");
  return t;
}

Theorem2Constants theorem2_constants(const HyperParams& hp, double lam_min_S, double lam_max_S, int n, int P,
                                     double b_eps_bar) {
  if (!(hp.gamma > 0.0) || P < 1 || !(b_eps_bar >= 0.0)) {
    throw std::invalid_argument("theorem2_constants: invalid parameters");
  }
  const Ftcl2RateTerms terms = ftcl2_rate_terms(hp.xi_G, hp.xi_C, hp.gamma1, n, lam_min_S, lam_max_S);
  const double g = hp.gamma;
  const double g1 = hp.gamma1;
  const double xg = hp.xi_G;
  const double xc = hp.xi_C;
  const double Pd = static_cast<double>(P);
  const double nd = static_cast<double>(n);
  const double n_half = std::pow(nd, 0.5 * (1.0 - g1));
  const double n_full = std::pow(nd, 1.0 - g1);
  const double b_pow = std::pow(b_eps_bar, g1);

  Theorem2Constants t;
  t.gamma = g;
  t.gamma1 = g1;
  t.A = terms.A;
  t.B = terms.B;
  t.a_prime = t.A - g * t.B;
  t.alpha_prime = t.a_prime * std::pow(g, 0.5 * (g1 + 1.0));
  t.b_prime = 2.0 * b_pow * n_half *
              (xg + g * xg * xg * n_half + g * xc * xg * n_half +
               std::sqrt(lam_max_S) * (xc + g * xc * xg * n_half + g * xc * xc * n_half));
  t.c_prime = g * (n_full * b_pow * b_pow * (xg * xg + 2.0 * xc * xg * Pd) + xc * xc * Pd * Pd * n_half * b_pow);
  t.gamma_admissible = g < terms.bound();
  return t;
}

StepCount settling_time_lemma1(double V0, double a, double b, double mu) {
  if (!(a > 0.0 && a < 1.0) || !(b > 0.0) || !(mu > 0.0 && mu < 1.0) || !(V0 >= 0.0)) {
    throw std::domain_error("settling_time_lemma1: requires 0<a<1, b>0, 0<mu<1, V0>=0");
  }
  const double base = b / (1.0 - a);
  const double threshold = std::pow(base, 1.0 / (1.0 - mu));
  if (V0 <= threshold) return 1;
  const double den = a * threshold + b * std::pow(base, mu / (1.0 - mu));
  return floor_plus_one(V0 / den);
}

StepCount settling_time_lemma2(double V0, double c, double alpha) {
  if (!(c > 0.0) || !(alpha > 0.0 && alpha < 1.0) || !(V0 >= 0.0)) {
    throw std::domain_error("settling_time_lemma2: requires c>0, 0<alpha<1, V0>=0");
  }
  const double threshold = std::pow(c, 1.0 / (1.0 - alpha));
  if (V0 <= threshold) return 1;
  // base = 1 - t; log1p keeps t resolvable when it is far below machine epsilon.
  const double t = c * std::pow(V0, alpha - 1.0);
  if (!(t > 0.0 && t < 1.0)) {
    throw std::domain_error("settling_time_lemma2: log base " + format_double(1.0 - t) + " outside (0,1)");
  }
  return floor_plus_one(std::log(threshold / V0) / std::log1p(-t));
}

double attractivity_root(double a_prime, double b_prime, double c_prime, double gamma1, const RootOptions& opts) {
  if (!(a_prime > 0.0)) throw std::domain_error("attractivity_root: a' must be positive");
  if (!(b_prime >= 0.0) || !(c_prime >= 0.0)) throw std::invalid_argument("attractivity_root: b', c' must be >= 0");
  if (b_prime == 0.0 && c_prime == 0.0) return 0.0;
  const double power = gamma1 + 1.0;
  auto h = [&](double s) { return -a_prime * std::pow(s, power) + b_prime * s + c_prime; };

  double lo = opts.lower;
  double hi = std::max(1.0, 2.0 * lo);
  if (h(lo) <= 0.0) return lo;
  int doublings = 0;
  while (h(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > opts.max_doublings) {
      throw std::runtime_error("attractivity_root: no sign change found");
    }
  }
  while (hi - lo > opts.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

BoundsReport bounds_ftcl1(const Theorem1Constants& consts, double V0, double b_eps_bar, double theta0_norm) {
  BoundsReport r;
  r.method = Method::FTCL1;
  r.gamma = consts.gamma;
  r.gamma_bound = consts.gamma_bound;
  r.gamma_admissible = consts.gamma_admissible;
  r.V0 = V0;
  r.theta0_norm = theta0_norm;
  r.b_eps_bar = b_eps_bar;
  r.t1 = consts;
  if (!consts.gamma_admissible) r.notes.emplace_back("gamma not admissible");

  if (consts.a_gamma > 0.0 && consts.a_gamma < 1.0 && consts.b_gamma > 0.0) {
    r.k1_star = settling_time_lemma1(V0, consts.a_gamma, consts.b_gamma, 0.5);
  } else {
    r.notes.emplace_back("K1* unavailable: requires 0 < a_gamma < 1 and b_gamma > 0");
  }

  if (consts.a < 0.0) {
    const double disc = consts.b_u * consts.b_u - 4.0 * consts.a * consts.c;
    if (disc < 0.0) throw std::logic_error("bounds_ftcl1: negative discriminant with a < 0");
    r.b_theta = std::max(0.0, (-consts.b_u - std::sqrt(disc)) / (2.0 * consts.a));
    const double inside = r.b_theta * r.b_theta / consts.gamma;
    const double num = V0 - inside;
    const double den = consts.a_gamma * inside - consts.b_u * theta0_norm - consts.c;
    if (num <= 0.0) {
      r.k2_star = 1;
    } else if (den > 0.0) {
      r.k2_star = floor_plus_one(num / den);
    } else {
      r.notes.emplace_back("K2* inconclusive: non-positive denominator");
    }
  } else {
    r.b_theta = std::numeric_limits<double>::infinity();
    r.notes.emplace_back("attractivity bound unavailable: a >= 0");
  }
  return r;
}

BoundsReport bounds_ftcl2(const Theorem2Constants& consts, double V0, double b_eps_bar, double theta0_norm) {
  BoundsReport r;
  r.method = Method::FTCL2;
  r.gamma = consts.gamma;
  r.gamma_bound = consts.A / consts.B;
  r.gamma_admissible = consts.gamma_admissible;
  r.V0 = V0;
  r.theta0_norm = theta0_norm;
  r.b_eps_bar = b_eps_bar;
  r.t2 = consts;
  if (!consts.gamma_admissible) r.notes.emplace_back("gamma not admissible");

  const double alpha = 0.5 * (consts.gamma1 + 1.0);
  if (consts.alpha_prime > 0.0 && alpha < 1.0) {
    r.k1_star = settling_time_lemma2(V0, consts.alpha_prime, alpha);
  } else {
    r.notes.emplace_back("K1* unavailable: requires alpha' > 0 and gamma1 < 1");
  }

  if (consts.a_prime > 0.0) {
    r.b_theta = attractivity_root(consts.a_prime, consts.b_prime, consts.c_prime, consts.gamma1);
    const double inside = r.b_theta * r.b_theta / consts.gamma;
    const double num = V0 - inside;
    const double den = consts.alpha_prime * std::pow(consts.gamma, -alpha) * std::pow(r.b_theta, consts.gamma1 + 1.0) -
                       consts.b_prime * theta0_norm - consts.c_prime;
    if (num <= 0.0) {
      r.k2_star = 1;
    } else if (den > 0.0) {
      r.k2_star = floor_plus_one(num / den);
    } else {
      r.notes.emplace_back("K2* inconclusive: non-positive denominator");
    }
  } else {
    r.b_theta = std::numeric_limits<double>::infinity();
    r.notes.emplace_back("attractivity bound unavailable: a' <= 0");
  }
  return r;
}

std::string BoundsReport::to_key_value(const std::string& prefix) const {
  std::ostringstream out;
  const std::string p = prefix.empty() ? "" : prefix + ".";
  auto kv = [&](const std::string& key, const std::string& value) { out << p << key << '=' << value << '\n'; };
  auto num = [&](const std::string& key, double v) { kv(key, format_double(v)); };
  auto steps = [&](const std::string& key, const std::optional<StepCount>& s) {
    if (!s) {
      kv(key, "inconclusive");
    } else if (*s == kSaturated) {
      kv(key, "saturated");
    } else {
      kv(key, std::to_string(*s));
    }
  };
  kv("method", std::string(method_name(method)));
  num("gamma", gamma);
  num("gamma_bound", gamma_bound);
  kv("gamma_admissible", gamma_admissible ? "true" : "false");
  num("V0", V0);
  num("theta0_norm", theta0_norm);
  num("b_eps_bar", b_eps_bar);
  steps("K1_star", k1_star);
  num("b_theta", b_theta);
  steps("K2_star", k2_star);
  if (t1) {
    num("a", t1->a);
    num("b_u", t1->b_u);
    num("c", t1->c);
    num("a_gamma", t1->a_gamma);
    num("b_gamma", t1->b_gamma);
    num("eta", t1->eta);
  }
  if (t2) {
    num("A", t2->A);
    num("B", t2->B);
    num("a_prime", t2->a_prime);
    num("alpha_prime", t2->alpha_prime);
    num("b_prime", t2->b_prime);
    num("c_prime", t2->c_prime);
    num("gamma1", t2->gamma1);
  }
  for (size_t i = 0; i < notes.size(); ++i) kv("note" + std::to_string(i), notes[i]);
  return out.str();
}

MonitorResult monitor_decrease(const std::vector<DecreaseSample>& run, const MonitorConfig& cfg) {
  if (cfg.method != Method::FTCL1 && cfg.method != Method::FTCL2) {
    throw std::invalid_argument("monitor_decrease: only FTCL1 and FTCL2 carry a decrease inequality");
  }
  MonitorResult result;
  for (const auto& s : run) {
    if (!s.warmup_done || s.V_prev < cfg.V_floor) continue;
    if (!(s.lam_min > 0.0)) {
      result.inadmissible_steps.push_back(s.k);
      continue;
    }
    double allowed = 0.0;
    if (cfg.method == Method::FTCL1) {
      const Theorem1Constants t = theorem1_constants(cfg.hp, s.lam_min, s.lam_max, cfg.P, cfg.b_eps_bar, cfg.eta);
      if (!t.gamma_admissible) {
        result.inadmissible_steps.push_back(s.k);
        continue;
      }
      if ((cfg.eta + 1.0) * s.s_theta_norm < cfg.hp.beta + s.s_theta_norm + cfg.P * cfg.b_eps_bar) {
        result.eta_premise_failures.push_back(s.k);
      }
      allowed = -t.a_gamma * s.V_prev - t.b_gamma * std::sqrt(s.V_prev);
    } else {
      const Theorem2Constants t = theorem2_constants(cfg.hp, s.lam_min, s.lam_max, cfg.n, cfg.P, cfg.b_eps_bar);
      if (!t.gamma_admissible || !(t.alpha_prime > 0.0)) {
        result.inadmissible_steps.push_back(s.k);
        continue;
      }
      const double alpha = 0.5 * (cfg.hp.gamma1 + 1.0);
      allowed = -t.alpha_prime * std::min(s.V_prev / t.alpha_prime, std::pow(s.V_prev, alpha));
    }
    ++result.checked;
    const double slack = (s.V - s.V_prev) - allowed;
    if (slack > cfg.rel_tol * s.V_prev) result.violations.push_back({s.k, slack});
  }
  return result;
}

}  // namespace ftcl
