#pragma once

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace modpulse {

struct RunConfig {
  int version = 1;
  std::vector<double> rho{1.0};
  std::vector<double> r{1.0};
  double gamma = 1.0;
  int n0 = 0;
  double l0 = 0.35;
  int N = 2;
  double epsilon = 0.1;
  int K = 16;
  int x_points = 5120;
  int domain_cells = 40;
  double dt_factor = 0.2;
  double T = 100.0;
  int l_points = 101;
  std::string directory = "out";
  int stride = 100;
  std::vector<std::string> formats{"csv", "json"};
  std::uint64_t seed = 1;
};

/// Validates every field before any computation; throws ConfigError naming the field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

struct CommandOptions {
  std::filesystem::path out;  // empty: the configured directory
  bool has_seed = false;
  std::uint64_t seed = 0;
  bool force = false;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"bands",       "check",      "envelope", "spectrum", "jordan",
                                                 "normalform", "homoclinic", "simulate", "pipeline"};
  return names;
}

/// Runs one subcommand. Returns 0 on success, 1 on numerical failure or a failed
/// check, 2 on configuration errors.
int run_command(const std::string& name, const RunConfig& config, const CommandOptions& options, std::ostream& log);

/// Loads the config file and runs; malformed input yields 2 without touching the output directory.
int run_command_file(const std::string& name, const std::filesystem::path& config_path,
                     const CommandOptions& options, std::ostream& log);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace modpulse
