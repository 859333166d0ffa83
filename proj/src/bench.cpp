#include "ftcl/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ftcl/config.hpp"
#include "ftcl/csv.hpp"

namespace ftcl {

namespace {

double matrix_norm(const Matrix& m) { return m.cols() == 1 ? m.col(0).norm() : m.norm(); }

void require_finite(const std::string& what, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument(what + " must be finite");
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

HyperParams make_hp(double gamma, double xi_G, double xi_C, double beta, double gamma1) {
  HyperParams hp;
  hp.gamma = gamma;
  hp.xi_G = xi_G;
  hp.xi_C = xi_C;
  hp.beta = beta;
  hp.gamma1 = gamma1;
  return hp;
}

std::vector<MethodConfig> make_methods(double gamma_G, double sigma_G, double sigma_C, double xi_G, double xi_C,
                                       double beta, double gamma1, double bxi_G, double bxi_C) {
  return {
      {Method::GD, make_hp(gamma_G, 1.0, 0.0, 1.0, 0.5), false},
      {Method::CL, make_hp(0.0, sigma_G, sigma_C, 1.0, 0.5), true},
      {Method::FTCL1, make_hp(0.0, xi_G, xi_C, beta, 0.5), true},
      {Method::FTCL2, make_hp(0.0, bxi_G, bxi_C, 1.0, gamma1), true},
  };
}

}  // namespace

void ExcitationSpec::validate() const {
  require_finite("excitation amplitude", amplitude);
  require_finite("excitation decay", decay);
  if (decay < 0.0) throw std::invalid_argument("excitation decay must be >= 0");
  for (double w : frequencies) require_finite("excitation frequency", w);
}

std::vector<double> excitation_phases(const ExcitationSpec& spec, std::uint64_t seed) {
  std::vector<double> phases(spec.frequencies.size(), 0.0);
  if (!spec.random_phase) return phases;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
  for (double& ph : phases) ph = dist(rng);
  return phases;
}

Vector excitation(const ExcitationSpec& spec, long k, int m, const std::vector<double>& phases) {
  const double kd = static_cast<double>(k);
  double sum = 0.0;
  for (size_t i = 0; i < spec.frequencies.size(); ++i) {
    const double ph = i < phases.size() ? phases[i] : 0.0;
    sum += std::sin(spec.frequencies[i] * kd + ph);
  }
  return Vector::Constant(m, spec.amplitude * std::exp(-spec.decay * kd) * sum);
}

void ExperimentConfig::validate() const {
  if (system != "example1" && system != "example2") throw std::invalid_argument("unknown system '" + system + "'");
  if (basis.kind != "example1" && basis.kind != "rbf") {
    throw std::invalid_argument("unknown basis kind '" + basis.kind + "'");
  }
  if (basis.kind == "rbf") {
    if (basis.centers < 1) throw std::invalid_argument("rbf basis needs at least one center");
    if (!(basis.spread > 0.0)) throw std::invalid_argument("rbf spread must be positive");
    if (!(basis.hi >= basis.lo)) throw std::invalid_argument("rbf center range is empty");
  }
  if (!(k0 >= 0 && k0 < kf)) throw std::invalid_argument("time span requires 0 <= k0 < kf");
  if (x0.size() != 1) throw std::invalid_argument("x0 must have one entry per state (n = 1)");
  if (domain_lo.size() != x0.size() || domain_hi.size() != x0.size()) {
    throw std::invalid_argument("domain bounds must match the state dimension");
  }
  domain().validate();
  filter.validate();
  excitation.validate();
  if (noise.mode == NoiseMode::Known && !(noise.b_eps_bar >= 0.0)) {
    throw std::invalid_argument("b_eps_bar must be >= 0");
  }
  if (P < 1) throw std::invalid_argument("P must be >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (methods.empty()) throw std::invalid_argument("no estimators configured");
  for (size_t i = 0; i < methods.size(); ++i) {
    for (size_t j = i + 1; j < methods.size(); ++j) {
      if (methods[i].method == methods[j].method) {
        throw std::invalid_argument("estimator listed twice: " + std::string(method_name(methods[i].method)));
      }
    }
    const MethodConfig& mc = methods[i];
    if (mc.auto_gamma && mc.method == Method::GD) throw std::invalid_argument("gd has no automatic rate");
    HyperParams hp = mc.hp;
    if (mc.auto_gamma) hp.gamma = 1.0;
    ftcl::validate(mc.method, hp);
  }
}

DomainSpec ExperimentConfig::domain() const {
  DomainSpec d;
  d.x_lo = to_vector(domain_lo);
  d.x_hi = to_vector(domain_hi);
  d.intervals = intervals;
  return d;
}

const MethodConfig* ExperimentConfig::find(Method m) const {
  for (const auto& mc : methods) {
    if (mc.method == m) return &mc;
  }
  return nullptr;
}

MethodConfig* ExperimentConfig::find(Method m) {
  for (auto& mc : methods) {
    if (mc.method == m) return &mc;
  }
  return nullptr;
}

ExperimentConfig example1_config() {
  ExperimentConfig cfg;
  cfg.system = "example1";
  cfg.basis.kind = "example1";
  cfg.domain_lo = {0.0};
  cfg.domain_hi = {2.0};
  cfg.P = 3;
  cfg.noise = {NoiseMode::Known, 0.0};
  cfg.methods = make_methods(0.7, 1.0, 0.3, 1.0, 0.3, 0.3, 0.6, 1.0, 0.3);
  cfg.out_dir = "out/example1";
  return cfg;
}

ExperimentConfig example2_config() {
  ExperimentConfig cfg;
  cfg.system = "example2";
  cfg.basis = {"rbf", 5, -2.0, 2.0, 1.2};
  cfg.domain_lo = {-2.0};
  cfg.domain_hi = {2.0};
  cfg.P = 10;
  cfg.noise = {NoiseMode::Auto, 0.0};
  cfg.methods = make_methods(0.8, 1.2, 0.1, 1.0, 0.1, 0.65, 0.7, 1.0, 0.05);
  cfg.out_dir = "out/example2";
  return cfg;
}

ExperimentConfig preset_config(const std::string& name) {
  if (name == "example1") return example1_config();
  if (name == "example2") return example2_config();
  throw std::invalid_argument("unknown preset '" + name + "' (expected example1 or example2)");
}

DiscreteSystem build_system(const ExperimentConfig& cfg) {
  if (cfg.system == "example1") return make_example1_system();
  if (cfg.system == "example2") return make_example2_system();
  throw std::invalid_argument("unknown system '" + cfg.system + "'");
}

BasisSet build_basis(const ExperimentConfig& cfg) {
  if (cfg.basis.kind == "example1") return make_example1_basis();
  if (cfg.basis.kind == "rbf") {
    return make_rbf_basis(uniform_centers(cfg.basis.lo, cfg.basis.hi, cfg.basis.centers), cfg.basis.spread, 1);
  }
  throw std::invalid_argument("unknown basis kind '" + cfg.basis.kind + "'");
}

Matrix build_theta_star(const ExperimentConfig& cfg, const DiscreteSystem& sys, const BasisSet& basis) {
  if (cfg.system == "example1" && cfg.basis.kind == "example1") return example1_theta();
  return fit_optimal_theta(sys, basis, cfg.domain());
}

LearningErrorEvaluator::LearningErrorEvaluator(const DiscreteSystem& sys, const BasisSet& basis,
                                               const DomainSpec& domain)
    : p_(basis.p), q_(basis.q) {
  for (const auto& node : trapezoid_nodes(domain)) {
    weights_.push_back(node.weight);
    phi_.push_back(basis.phi(node.x));
    chi_.push_back(basis.chi(node.x));
    f_.push_back(sys.drift(node.x));
    g_.push_back(sys.input_gain(node.x));
    phi_integral_ += node.weight * phi_.back().norm();
    chi_integral_ += node.weight * chi_.back().norm();
  }
}

LearningErrors LearningErrorEvaluator::evaluate(const Matrix& theta_hat) const {
  const Matrix tf = theta_hat.topRows(p_).transpose();
  const Matrix tg = theta_hat.bottomRows(q_).transpose();
  LearningErrors out;
  for (size_t i = 0; i < weights_.size(); ++i) {
    out.E_f += weights_[i] * (f_[i] - tf * phi_[i]).norm();
    out.E_g += weights_[i] * matrix_norm(g_[i] - tg * chi_[i]);
  }
  return out;
}

LearningErrors LearningErrorEvaluator::sup_errors(const Matrix& theta) const {
  const Matrix tf = theta.topRows(p_).transpose();
  const Matrix tg = theta.bottomRows(q_).transpose();
  LearningErrors out;
  for (size_t i = 0; i < weights_.size(); ++i) {
    out.E_f = std::max(out.E_f, (f_[i] - tf * phi_[i]).norm());
    out.E_g = std::max(out.E_g, matrix_norm(g_[i] - tg * chi_[i]));
  }
  return out;
}

LearningErrors learning_errors(const Matrix& theta_hat, const BasisSet& basis, const DiscreteSystem& truth,
                               const DomainSpec& domain) {
  return LearningErrorEvaluator(truth, basis, domain).evaluate(theta_hat);
}

double iae(const std::vector<double>& series) {
  double s = 0.0;
  for (double v : series) s += std::abs(v);
  return s;
}

double MethodRun::iae_f() const {
  double s = 0.0;
  for (const auto& r : steps) s += std::abs(r.E_f);
  return s;
}

double MethodRun::iae_g() const {
  double s = 0.0;
  for (const auto& r : steps) s += std::abs(r.E_g);
  return s;
}

double MethodRun::final_error() const { return steps.empty() ? 0.0 : std::sqrt(steps.back().theta_err_sq); }

const MethodRun* RunResult::find(Method m) const {
  for (const auto& r : methods) {
    if (r.method == m) return &r;
  }
  return nullptr;
}

namespace {

struct Lane {
  MethodConfig cfg;
  EstimatorState st;
  MethodRun run;
};

NoiseModel declare_noise(const ExperimentConfig& cfg, const LearningErrorEvaluator& eval, const Matrix& theta_star) {
  NoiseModel nm;
  switch (cfg.noise.mode) {
    case NoiseMode::Known:
      nm.b_eps_bar = cfg.noise.b_eps_bar;
      nm.known = true;
      break;
    case NoiseMode::Unknown:
      nm.known = false;
      break;
    case NoiseMode::Auto: {
      const LearningErrors sup = eval.sup_errors(theta_star);
      const double u_max = std::abs(cfg.excitation.amplitude) * static_cast<double>(cfg.excitation.frequencies.size());
      nm.b_eps = sup.E_f + sup.E_g * u_max;
      nm.b_eps_bar = nm.b_eps / (1.0 - std::abs(cfg.filter.c));
      nm.known = true;
      break;
    }
  }
  return nm;
}

void freeze_rates(std::vector<Lane>& lanes, const HistoryStack& stack, int n, std::vector<std::string>& notes) {
  for (auto& lane : lanes) {
    if (!lane.cfg.auto_gamma) continue;
    const HyperParams& hp = lane.st.hp;
    double g = 0.0;
    switch (lane.cfg.method) {
      case Method::CL:
        g = gamma_c_rule(hp.xi_G, hp.xi_C, stack.lam_max());
        break;
      case Method::FTCL1:
        g = 0.9 * gamma_bound_ftcl1(hp.xi_G, hp.xi_C, hp.beta, stack.lam_min(), stack.lam_max());
        break;
      case Method::FTCL2:
        g = 0.9 * gamma_bound_ftcl2(hp.xi_G, hp.xi_C, hp.gamma1, n, stack.lam_min(), stack.lam_max());
        break;
      case Method::GD:
        break;
    }
    lane.st.hp.gamma = g;
    lane.run.hp.gamma = g;
    notes.push_back(std::string(method_name(lane.cfg.method)) + " rate frozen at " + format_double(g));
  }
}

std::optional<BoundsReport> warmup_bounds(const Lane& lane, const HistoryStack& stack, const RunResult& res,
                                          const Matrix& theta_tilde) {
  const HyperParams& hp = lane.st.hp;
  if (!(hp.gamma > 0.0)) return std::nullopt;
  const double V0 = lyapunov_V(theta_tilde, hp.gamma);
  const double t0 = theta_tilde.norm();
  const double b = res.noise.known ? res.noise.b_eps_bar : 0.0;
  const int n = static_cast<int>(res.theta_star.cols());
  BoundsReport rep;
  if (lane.cfg.method == Method::FTCL1) {
    rep = bounds_ftcl1(theorem1_constants(hp, stack.lam_min(), stack.lam_max(), res.cfg.P, b, res.cfg.eta), V0, b,
                       t0);
    if (!(hp.beta > res.cfg.P * b)) rep.notes.emplace_back("beta <= P b_eps_bar");
  } else if (lane.cfg.method == Method::FTCL2) {
    rep = bounds_ftcl2(theorem2_constants(hp, stack.lam_min(), stack.lam_max(), n, res.cfg.P, b), V0, b, t0);
  } else {
    return std::nullopt;
  }
  if (!res.noise.known) {
    rep.k2_star.reset();
    if (lane.cfg.method == Method::FTCL1) rep.notes.emplace_back("beta constraint unverifiable");
    rep.notes.emplace_back("b_eps_bar unknown: attractivity bound unverifiable");
  }
  return rep;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult res;
  res.cfg = cfg;

  const DiscreteSystem sys = build_system(cfg);
  const BasisSet basis = build_basis(cfg);
  if (basis.m != sys.m) throw std::invalid_argument("basis input dimension does not match the system");
  res.theta_star = build_theta_star(cfg, sys, basis);
  const LearningErrorEvaluator eval(sys, basis, cfg.domain());
  res.phi_integral = eval.phi_integral();
  res.chi_integral = eval.chi_integral();
  res.floor_errors = eval.evaluate(res.theta_star);
  res.noise = declare_noise(cfg, eval, res.theta_star);

  const int dim = basis.dim();
  const int n = sys.n;
  res.stack = HistoryStack(dim, n, cfg.P);
  HistoryStack& stack = res.stack;

  std::vector<Lane> lanes;
  for (const auto& mc : cfg.methods) {
    Lane lane;
    lane.cfg = mc;
    lane.st.method = mc.method;
    lane.st.hp = mc.hp;
    if (mc.auto_gamma) lane.st.hp.gamma = 0.0;
    lane.st.theta_hat = Matrix::Zero(dim, n);
    lane.run.method = mc.method;
    lane.run.hp = lane.st.hp;
    lanes.push_back(std::move(lane));
  }

  const std::vector<double> phases = excitation_phases(cfg.excitation, cfg.seed);
  const FilterConfig fcfg = cfg.filter;
  Vector x = to_vector(cfg.x0);
  FilterState filt = FilterState::initial(dim, x);

  for (long k = cfg.k0; k <= cfg.kf; ++k) {
    const long rel = k - cfg.k0;
    const NormalizedSample sample = normalize(filt, x);
    if (rel >= 1) stack.record(sample, rel);

    if (!res.warmup_step && stack.full() && stack.rank_condition()) {
      res.warmup_step = rel;
      freeze_rates(lanes, stack, n, res.notes);
      for (auto& lane : lanes) {
        lane.st.warmup_done = true;
        lane.run.bounds = warmup_bounds(lane, stack, res, lane.st.theta_hat - res.theta_star);
      }
    }

    const Vector u = excitation(cfg.excitation, k, sys.m, phases);
    for (auto& lane : lanes) {
      if (!res.warmup_step && lane.cfg.auto_gamma && lane.cfg.method == Method::CL) {
        lane.st.hp.gamma = gamma_c_rule(lane.st.hp.xi_G, lane.st.hp.xi_C, stack.lam_max());
      }
      const Matrix theta_tilde = lane.st.theta_hat - res.theta_star;
      StepRecord r;
      r.k = k;
      r.x = x;
      r.u = u;
      r.theta_hat = lane.st.theta_hat;
      r.e_norm = prediction_error(lane.st.theta_hat, sample, sample.ck_x0_bar).norm();
      r.theta_err_sq = theta_tilde.squaredNorm();
      const LearningErrors le = eval.evaluate(lane.st.theta_hat);
      r.E_f = le.E_f;
      r.E_g = le.E_g;
      r.stack_ratio = stack.ratio();
      r.lam_min = stack.lam_min();
      r.lam_max = stack.lam_max();
      r.warmup_done = lane.st.warmup_done;
      if (!stack.empty()) r.s_theta_norm = (stack.s() * theta_tilde).norm();
      lane.run.steps.push_back(std::move(r));

      if (k < cfg.kf && lane.st.hp.gamma > 0.0) {
        lane.st.k = rel;
        lane.st = step(lane.st, sample, stack);
      }
    }

    if (k == cfg.kf) break;
    const Vector z = eval_regressor(basis, x, u);
    const Vector x_next = sys.step(x, u);
    if (!x_next.allFinite()) throw std::runtime_error("system state became non-finite at step " + std::to_string(k));
    filt = filter_step(filt, fcfg, z, x);
    x = x_next;
  }

  for (auto& lane : lanes) {
    const double g = lane.st.hp.gamma;
    lane.run.hp = lane.st.hp;
    for (auto& r : lane.run.steps) r.V = g > 0.0 ? r.theta_err_sq / g : std::nan("");
    res.methods.push_back(std::move(lane.run));
  }

  if (!res.warmup_step) {
    res.flags.emplace_back("rank condition unmet");
  } else {
    for (const auto& run : res.methods) {
      if (!run.bounds || !run.bounds->k2_star || *run.bounds->k2_star == kSaturated) continue;
      const double ef_bound = run.bounds->b_theta * res.phi_integral + res.floor_errors.E_f;
      const double eg_bound = run.bounds->b_theta * res.chi_integral + res.floor_errors.E_g;
      const long settle = *res.warmup_step + static_cast<long>(*run.bounds->k2_star);
      bool ok = true;
      for (const auto& r : run.steps) {
        if (r.k - cfg.k0 >= settle && (r.E_f > ef_bound || r.E_g > eg_bound)) ok = false;
      }
      res.notes.push_back(std::string(method_name(run.method)) + " E_f <= " + format_double(ef_bound) +
                          " and E_g <= " + format_double(eg_bound) + " after step " + std::to_string(settle) + ": " +
                          (ok ? "holds" : "violated"));
    }
  }
  return res;
}

std::vector<DecreaseSample> decrease_samples(const MethodRun& run) {
  std::vector<DecreaseSample> out;
  for (size_t i = 1; i < run.steps.size(); ++i) {
    const StepRecord& prev = run.steps[i - 1];
    const StepRecord& cur = run.steps[i];
    DecreaseSample s;
    s.k = cur.k;
    s.V_prev = prev.V;
    s.V = cur.V;
    s.s_theta_norm = prev.s_theta_norm;
    s.lam_min = prev.lam_min;
    s.lam_max = prev.lam_max;
    s.warmup_done = prev.warmup_done;
    out.push_back(s);
  }
  return out;
}

void write_method_csv(const MethodRun& run, std::ostream& out) {
  if (run.steps.empty()) return;
  const StepRecord& first = run.steps.front();
  out << 'k';
  for (Eigen::Index i = 0; i < first.x.size(); ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < first.u.size(); ++i) out << ",u" << i;
  for (Eigen::Index i = 0; i < first.theta_hat.rows(); ++i) {
    for (Eigen::Index j = 0; j < first.theta_hat.cols(); ++j) out << ",theta_" << i << '_' << j;
  }
  out << ",e_norm,V,Ef,Eg,stack_ratio\n";
  for (const auto& r : run.steps) {
    out << r.k;
    for (Eigen::Index i = 0; i < r.x.size(); ++i) out << ',' << format_double(r.x(i));
    for (Eigen::Index i = 0; i < r.u.size(); ++i) out << ',' << format_double(r.u(i));
    for (Eigen::Index i = 0; i < r.theta_hat.rows(); ++i) {
      for (Eigen::Index j = 0; j < r.theta_hat.cols(); ++j) out << ',' << format_double(r.theta_hat(i, j));
    }
    out << ',' << format_double(r.e_norm) << ',' << format_double(r.V) << ',' << format_double(r.E_f) << ','
        << format_double(r.E_g) << ',' << format_double(r.stack_ratio) << '\n';
  }
}

std::string summary_text(const RunResult& result) {
  std::ostringstream out;
  out << "system=" << result.cfg.system << '\n';
  out << "steps=" << result.cfg.k0 << ".." << result.cfg.kf << '\n';
  out << "warmup_step=" << (result.warmup_step ? std::to_string(*result.warmup_step) : "none") << '\n';
  out << "b_eps_bar=" << (result.noise.known ? format_double(result.noise.b_eps_bar) : "unknown") << '\n';
  out << "final_stack_ratio=" << format_double(result.stack.ratio()) << '\n';
  for (const auto& f : result.flags) out << "flag=" << f << '\n';
  out << '\n';
  out << "method     gamma          IAE(E_f)       IAE(E_g)       final ||theta_tilde||\n";
  for (const auto& run : result.methods) {
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %-14.6g %-14.6g %-14.6g %.6g\n", std::string(method_name(run.method)).c_str(),
                  run.hp.gamma, run.iae_f(), run.iae_g(), run.final_error());
    out << line;
  }
  for (const auto& run : result.methods) {
    if (!run.bounds) continue;
    out << "\n[" << method_name(run.method) << " bounds]\n";
    out << run.bounds->to_key_value();
  }
  if (!result.notes.empty()) {
    out << "\n[notes]\n";
    for (const auto& n : result.notes) out << n << '\n';
  }
  return out.str();
}

std::string resolved_values(const RunResult& result) {
  std::ostringstream out;
  out << "\n# resolved values (informational; the keys above reproduce this run)\n";
  out << "# warmup_step = " << (result.warmup_step ? std::to_string(*result.warmup_step) : "none") << '\n';
  for (const auto& run : result.methods) {
    const MethodConfig* mc = result.cfg.find(run.method);
    if (mc == nullptr || !mc->auto_gamma) continue;
    std::string name(method_name(run.method));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
    out << "# " << name << ".gamma = " << format_double(run.hp.gamma) << '\n';
  }
  if (result.cfg.noise.mode == NoiseMode::Auto) {
    out << "# noise.b_eps_bar = " << format_double(result.noise.b_eps_bar) << '\n';
  }
  return out.str();
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  for (const auto& run : result.methods) {
    std::string name(method_name(run.method));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
    auto f = open(name + ".csv");
    write_method_csv(run, f);
  }
  {
    auto f = open("stack.csv");
    result.stack.write_csv(f);
  }
  {
    auto f = open("summary.txt");
    f << summary_text(result);
  }
  {
    auto f = open("config.resolved.ini");
    f << serialize_config(result.cfg) << resolved_values(result);
  }
}

}  // namespace ftcl
