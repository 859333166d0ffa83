#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ftcl/analysis.hpp"
#include "ftcl/bench.hpp"
#include "ftcl/config.hpp"
#include "ftcl/csv.hpp"
#include "ftcl/estimators.hpp"
#include "ftcl/selftest.hpp"

namespace {

constexpr int kExitBadConfig = 2;
constexpr int kExitDivergence = 3;

struct GlobalOptions {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

void apply_globals(ftcl::ExperimentConfig& cfg, const GlobalOptions& g) {
  if (g.out) cfg.out_dir = *g.out;
  if (g.seed) cfg.seed = *g.seed;
}

int execute(const ftcl::ExperimentConfig& cfg) {
  const ftcl::RunResult result = ftcl::run_experiment(cfg);
  ftcl::write_outputs(result, cfg.out_dir);
  std::cout << ftcl::summary_text(result);
  std::cout << "\nwrote " << cfg.out_dir << '\n';
  return 0;
}

int print_bounds(const ftcl::ExperimentConfig& cfg) {
  const ftcl::BoundsQuery& q = cfg.bounds;
  std::cout << "lam_min=" << ftcl::format_double(q.lam_min) << "\nlam_max=" << ftcl::format_double(q.lam_max)
            << "\nratio=" << ftcl::format_double(q.lam_max > 0.0 ? q.lam_min / q.lam_max : 0.0) << '\n';
  const double b = cfg.noise.mode == ftcl::NoiseMode::Known ? cfg.noise.b_eps_bar : 0.0;
  if (cfg.noise.mode != ftcl::NoiseMode::Known) std::cout << "note=b_eps_bar not given, using 0\n";
  for (const auto& mc : cfg.methods) {
    ftcl::HyperParams hp = mc.hp;
    const std::string name(ftcl::method_name(mc.method));
    switch (mc.method) {
      case ftcl::Method::GD:
        break;
      case ftcl::Method::CL:
        std::cout << "\n[CL]\ngamma_C_rule="
                  << ftcl::format_double(ftcl::gamma_c_rule(hp.xi_G, hp.xi_C, q.lam_max)) << '\n';
        break;
      case ftcl::Method::FTCL1: {
        const double bound = ftcl::gamma_bound_ftcl1(hp.xi_G, hp.xi_C, hp.beta, q.lam_min, q.lam_max);
        if (mc.auto_gamma) hp.gamma = 0.9 * bound;
        const auto t = ftcl::theorem1_constants(hp, q.lam_min, q.lam_max, cfg.P, b, cfg.eta);
        std::cout << "\n[" << name << "]\n" << ftcl::bounds_ftcl1(t, q.V0, b, q.theta0_norm).to_key_value();
        break;
      }
      case ftcl::Method::FTCL2: {
        const double bound = ftcl::gamma_bound_ftcl2(hp.xi_G, hp.xi_C, hp.gamma1, q.n, q.lam_min, q.lam_max);
        if (mc.auto_gamma) hp.gamma = 0.9 * bound;
        const auto t = ftcl::theorem2_constants(hp, q.lam_min, q.lam_max, q.n, cfg.P, b);
        std::cout << "\n[" << name << "]\n" << ftcl::bounds_ftcl2(t, q.V0, b, q.theta0_norm).to_key_value();
        break;
      }
    }
  }
  return 0;
}

int selftest() {
  int failed = 0;
  for (const auto& r : ftcl::run_selftests()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) std::cout << ": " << r.detail;
    std::cout << '\n';
    if (!r.passed) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online identification of discrete-time systems with finite-time concurrent learning", "ftcl"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--seed", g.seed, "Run seed");
  app.add_option("--set", g.sets, "Override section.key=value (repeatable)")->take_all()->allow_extra_args(false);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("config", config_path, "Config file")->required();

  std::string preset;
  auto* reproduce = app.add_subcommand("reproduce", "Run a built-in example");
  reproduce->add_option("preset", preset, "example1 or example2")->required()->check(
      CLI::IsMember({"example1", "example2"}));

  std::string bounds_path;
  auto* bounds = app.add_subcommand("bounds", "Evaluate rate bounds and settling times without simulating");
  bounds->add_option("config", bounds_path, "Config file (defaults to the example1 preset)");

  auto* self = app.add_subcommand("selftest", "Run the built-in invariant checks");

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitBadConfig;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadConfig;
  }

  try {
    if (*self) return selftest();
    if (*run) {
      ftcl::ExperimentConfig cfg = ftcl::load_config(config_path, g.sets);
      apply_globals(cfg, g);
      return execute(cfg);
    }
    if (*reproduce) {
      ftcl::ExperimentConfig cfg = ftcl::preset_with_overrides(preset, g.sets);
      apply_globals(cfg, g);
      return execute(cfg);
    }
    if (*bounds) {
      ftcl::ExperimentConfig cfg = bounds_path.empty() ? ftcl::preset_with_overrides("example1", g.sets)
                                                       : ftcl::load_config(bounds_path, g.sets);
      return print_bounds(cfg);
    }
  } catch (const ftcl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const ftcl::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitBadConfig;
  }
  return 0;
}
