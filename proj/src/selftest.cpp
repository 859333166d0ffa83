#include "ftcl/selftest.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "ftcl/analysis.hpp"
#include "ftcl/bench.hpp"
#include "ftcl/csv.hpp"
#include "ftcl/dynamics.hpp"
#include "ftcl/estimators.hpp"
#include "ftcl/filtering.hpp"
#include "ftcl/history.hpp"

namespace ftcl {

namespace {

SelfTestResult check(const std::string& name, const std::function<std::string()>& body) {
  SelfTestResult r;
  r.name = name;
  try {
    r.detail = body();
    r.passed = r.detail.empty();
  } catch (const std::exception& e) {
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

std::string filter_recursion() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const FilterConfig cfg{0.5};
  const int steps = 60;
  std::vector<Vector> z(steps, Vector(2));
  std::vector<Vector> x(steps, Vector(1));
  for (int j = 0; j < steps; ++j) {
    z[j] << U(rng), U(rng);
    x[j] << U(rng);
  }
  FilterState st = FilterState::initial(2, x[0]);
  for (int k = 0; k < steps; ++k) st = filter_step(st, cfg, z[k], x[k]);
  Vector d = Vector::Zero(2);
  Vector l = Vector::Zero(1);
  for (int j = 0; j < steps; ++j) {
    d += std::pow(cfg.c, steps - 1 - j) * z[j];
    l += std::pow(cfg.c, steps - j) * x[j];
  }
  const double err = std::max((st.d - d).cwiseAbs().maxCoeff(), (st.l - l).cwiseAbs().maxCoeff());
  return err < 1e-12 ? "" : "max deviation " + format_double(err);
}

std::string pipeline_identity() {
  const DiscreteSystem sys = make_example1_system();
  const BasisSet basis = make_example1_basis();
  const Matrix theta = example1_theta();
  const ExcitationSpec exc;
  const FilterConfig cfg{0.5};
  Vector x = Vector::Zero(1);
  FilterState st = FilterState::initial(basis.dim(), x);
  double worst = 0.0;
  for (long k = 0; k < 200; ++k) {
    const NormalizedSample s = normalize(st, x);
    const Vector r = theta.transpose() * s.d_bar - s.l_bar + s.ck_x0_bar - s.x_bar;
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
    const Vector u = excitation(exc, k, 1);
    st = filter_step(st, cfg, eval_regressor(basis, x, u), x);
    x = sys.step(x, u);
  }
  return worst < 1e-9 ? "" : "max residual " + format_double(worst);
}

std::string rate_bounds() {
  std::ostringstream bad;
  const double g1 = gamma_bound_ftcl1(1.0, 1.0, 1.0, 1.0, 1.0);
  if (std::abs(g1 - 2.0 / 9.0) > 1e-15) bad << "ftcl1 bound " << format_double(g1) << "; ";
  const double gc = gamma_c_rule(1.0, 0.3, 1.0);
  if (std::abs(gc - 1.0 / 2.3) > 1e-15) bad << "gamma_C " << format_double(gc) << "; ";
  return bad.str();
}

std::string settling_lemmas() {
  std::ostringstream bad;
  if (settling_time_lemma1(4.0, 0.5, 0.5, 0.5) != 5) bad << "lemma1; ";
  if (settling_time_lemma2(4.0, 0.5, 0.5) != 10) bad << "lemma2; ";
  if (settling_time_lemma1(0.5, 0.5, 0.5, 0.5) != 1) bad << "lemma1 threshold; ";
  return bad.str();
}

std::string degeneracy() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int dim = 3;
  HistoryStack stack(dim, 1, 3);
  auto sample = [&]() {
    NormalizedSample s;
    s.d_bar = Vector::NullaryExpr(dim, [&]() { return U(rng) / 3.0; });
    s.l_bar = Vector::Constant(1, U(rng) / 3.0);
    s.x_bar = Vector::Constant(1, U(rng) / 3.0);
    s.ck_x0_bar = Vector::Zero(1);
    return s;
  };
  for (int k = 1; k <= 3; ++k) stack.record(sample(), k);
  EstimatorState cl;
  cl.method = Method::CL;
  cl.hp.gamma = 0.2;
  cl.hp.xi_G = 1.0;
  cl.hp.xi_C = 0.3;
  cl.theta_hat = Matrix::NullaryExpr(dim, 1, [&]() { return U(rng); });
  cl.warmup_done = true;
  EstimatorState f2 = cl;
  f2.method = Method::FTCL2;
  f2.hp.gamma1 = 1.0;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const NormalizedSample s = sample();
    const Vector e1 = prediction_error(cl.theta_hat, s, s.ck_x0_bar);
    const Vector e2 = prediction_error(f2.theta_hat, s, s.ck_x0_bar);
    cl = update_cl(cl, s, stack, e1, stack_errors(cl.theta_hat, stack, s.ck_x0_bar));
    f2 = update_ftcl2(f2, s, stack, e2, stack_errors(f2.theta_hat, stack, s.ck_x0_bar));
    worst = std::max(worst, (cl.theta_hat - f2.theta_hat).cwiseAbs().maxCoeff());
  }
  return worst < 1e-12 ? "" : "max deviation " + format_double(worst);
}

std::string root_finder() {
  const double r = attractivity_root(1.0, 0.5, 0.5, 1.0);
  return std::abs(r - 1.0) < 1e-10 ? "" : "root " + format_double(r);
}

std::string stack_cache() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  HistoryStack stack(3, 1, 4);
  double prev = 0.0;
  std::ostringstream bad;
  for (long k = 1; k <= 200; ++k) {
    NormalizedSample s;
    s.d_bar = Vector::NullaryExpr(3, [&]() { return U(rng) / 2.0; });
    s.l_bar = Vector::Zero(1);
    s.x_bar = Vector::Zero(1);
    s.ck_x0_bar = Vector::Zero(1);
    stack.record(s, k);
    if ((stack.s() - stack.recompute_s()).cwiseAbs().maxCoeff() > 1e-12) bad << "stale S at " << k << "; ";
    if (stack.full()) {
      if (stack.ratio() + 1e-15 < prev) bad << "ratio decreased at " << k << "; ";
      prev = stack.ratio();
    }
  }
  return bad.str();
}

}  // namespace

std::vector<SelfTestResult> run_selftests() {
  return {
      check("filter_recursion", filter_recursion), check("pipeline_identity", pipeline_identity),
      check("rate_bounds", rate_bounds),           check("settling_lemmas", settling_lemmas),
      check("ftcl2_cl_degeneracy", degeneracy),    check("attractivity_root", root_finder),
      check("stack_cache", stack_cache),
  };
}

}  // namespace ftcl
