#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ftcl/bench.hpp"

namespace ftcl {

/// Parse failure with the offending line (0 for overrides) and key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string key, const std::string& message);
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Sectioned key=value text:
///
///   [system]  name
///   [basis]   kind centers lo hi spread
///   [run]     k0 kf x0 P eta seed out methods
///   [domain]  lo hi intervals
///   [filter]  c
///   [excitation] amplitude decay frequencies random_phase
///   [noise]   b_eps_bar            (number, auto or unknown)
///   [gd]      gamma
///   [cl]      gamma sigma_G sigma_C            (gamma may be auto)
///   [ftcl1]   gamma xi_G xi_C beta             (gamma may be auto)
///   [ftcl2]   gamma xi_G xi_C gamma1           (gamma may be auto)
///   [bounds]  lam_min lam_max n V0 theta0_norm
///
/// Keys missing from the text keep the values of the preset named by
/// system.name. Overrides have the form section.key=value and win over the
/// text. Unknown sections and keys are rejected.
ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Preset plus overrides, as if the preset had been written out and re-read.
ExperimentConfig preset_with_overrides(const std::string& name, const std::vector<std::string>& overrides);

/// Full text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace ftcl
