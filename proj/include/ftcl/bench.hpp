#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ftcl/analysis.hpp"
#include "ftcl/dynamics.hpp"
#include "ftcl/estimators.hpp"
#include "ftcl/filtering.hpp"
#include "ftcl/history.hpp"

namespace ftcl {

/// u(k) = A exp(-decay k) sum_i sin(w_i k + phase_i), same value on every input.
struct ExcitationSpec {
  double amplitude = 0.1;
  double decay = 0.01;
  std::vector<double> frequencies{0.3, 0.7, 1.1};
  /// Draw phase_i uniformly in [0, 2 pi) from the run seed; zero otherwise.
  bool random_phase = false;

  void validate() const;
};

std::vector<double> excitation_phases(const ExcitationSpec& spec, std::uint64_t seed);
Vector excitation(const ExcitationSpec& spec, long k, int m, const std::vector<double>& phases = {});

struct BasisSpec {
  /// "example1" or "rbf".
  std::string kind = "example1";
  int centers = 5;
  double lo = -2.0;
  double hi = 2.0;
  double spread = 1.2;
};

struct MethodConfig {
  Method method = Method::GD;
  HyperParams hp;
  /// Rate picked at warmup: 0.9x the admissibility bound (FTCL) or the
  /// gamma_C rule (CL). Not available for GD.
  bool auto_gamma = false;
};

enum class NoiseMode { Known, Auto, Unknown };

struct NoiseSpec {
  NoiseMode mode = NoiseMode::Known;
  double b_eps_bar = 0.0;
};

/// Inputs for evaluating the bound calculators without a simulation.
struct BoundsQuery {
  double lam_min = 1.0;
  double lam_max = 1.0;
  int n = 1;
  double V0 = 1.0;
  double theta0_norm = 1.0;
};

struct ExperimentConfig {
  /// "example1" or "example2".
  std::string system = "example1";
  BasisSpec basis;
  std::vector<MethodConfig> methods;
  long k0 = 0;
  long kf = 500;
  std::vector<double> x0{0.0};
  std::vector<double> domain_lo{0.0};
  std::vector<double> domain_hi{2.0};
  int intervals = 500;
  FilterConfig filter;
  ExcitationSpec excitation;
  NoiseSpec noise;
  int P = 3;
  double eta = 1.0;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  BoundsQuery bounds;

  void validate() const;
  DomainSpec domain() const;
  const MethodConfig* find(Method m) const;
  MethodConfig* find(Method m);
};

ExperimentConfig example1_config();
ExperimentConfig example2_config();
/// "example1" or "example2".
ExperimentConfig preset_config(const std::string& name);

DiscreteSystem build_system(const ExperimentConfig& cfg);
BasisSet build_basis(const ExperimentConfig& cfg);
/// Exact parameters for example1, least-squares optimum otherwise.
Matrix build_theta_star(const ExperimentConfig& cfg, const DiscreteSystem& sys, const BasisSet& basis);

struct LearningErrors {
  double E_f = 0.0;
  double E_g = 0.0;
};

/// Caches basis and truth values on the quadrature nodes so E_f and E_g can be
/// evaluated every step.
class LearningErrorEvaluator {
 public:
  LearningErrorEvaluator(const DiscreteSystem& sys, const BasisSet& basis, const DomainSpec& domain);

  LearningErrors evaluate(const Matrix& theta_hat) const;
  /// Integral of ||phi(x)|| over the domain.
  double phi_integral() const { return phi_integral_; }
  /// Integral of ||chi(x)||_F over the domain.
  double chi_integral() const { return chi_integral_; }
  /// Largest pointwise ||e_f||, ||e_g||_F at theta over the nodes.
  LearningErrors sup_errors(const Matrix& theta) const;

 private:
  int p_;
  int q_;
  std::vector<double> weights_;
  std::vector<Vector> phi_;
  std::vector<Matrix> chi_;
  std::vector<Vector> f_;
  std::vector<Matrix> g_;
  double phi_integral_ = 0.0;
  double chi_integral_ = 0.0;
};

LearningErrors learning_errors(const Matrix& theta_hat, const BasisSet& basis, const DiscreteSystem& truth,
                               const DomainSpec& domain);

double iae(const std::vector<double>& series);

struct StepRecord {
  long k = 0;
  Vector x;
  Vector u;
  Matrix theta_hat;
  double e_norm = 0.0;
  double theta_err_sq = 0.0;
  double V = 0.0;
  double E_f = 0.0;
  double E_g = 0.0;
  double stack_ratio = 0.0;
  /// Spectrum and ||S theta_tilde|| of the stack used by the update from k.
  double lam_min = 0.0;
  double lam_max = 0.0;
  double s_theta_norm = 0.0;
  bool warmup_done = false;
};

struct MethodRun {
  Method method = Method::GD;
  HyperParams hp;
  std::vector<StepRecord> steps;
  std::optional<BoundsReport> bounds;

  double iae_f() const;
  double iae_g() const;
  double final_error() const;
};

struct RunResult {
  ExperimentConfig cfg;
  Matrix theta_star;
  NoiseModel noise;
  /// Step at which the stack became full with rank; empty if never.
  std::optional<long> warmup_step;
  std::vector<MethodRun> methods;
  std::vector<std::string> flags;
  std::vector<std::string> notes;
  HistoryStack stack{1, 1, 1};
  double phi_integral = 0.0;
  double chi_integral = 0.0;
  /// MFAE contribution to E_f, E_g at theta*.
  LearningErrors floor_errors;

  const MethodRun* find(Method m) const;
};

/// Simulates the system and runs every configured estimator in lockstep on
/// the same filtered data and history stack. Throws DivergenceError.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Consecutive (V(k-1), V(k)) pairs with the stack used for each update.
std::vector<DecreaseSample> decrease_samples(const MethodRun& run);

void write_method_csv(const MethodRun& run, std::ostream& out);
std::string summary_text(const RunResult& result);
/// Comment block listing the rates and noise bound picked during the run.
std::string resolved_values(const RunResult& result);
/// Writes <method>.csv, stack.csv, summary.txt and config.resolved.ini.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

}  // namespace ftcl
