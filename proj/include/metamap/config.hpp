#ifndef METAMAP_CONFIG_HPP
#define METAMAP_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace metamap {

/// Batch-experiment parameters.  Defaults are the desk-scale settings:
/// alpha = 0.5, epsilon schedule 0.1 * 2^-j for j = 0..4, grid 2^14.
struct ExperimentConfig {
  double alpha = 0.5;
  std::vector<double> eps_schedule = {0.1, 0.05, 0.025, 0.0125, 0.00625};
  double eps = 0.05;  // single-epsilon commands (mc, graph)
  int grid_m = 1 << 14;
  int cylinder_n = 0;  // 0 = choose from the leak target
  int w_count = 1024;  // resolved gaps in pull-backs
  long long mc_steps = 10000000;
  int mc_compare_cells = 512;
  std::uint64_t seed = 12345;
  std::string output_dir = ".";

  void validate() const;  // Error(config)
};

/// Flat `key = value` file (TOML-compatible subset: comments with #,
/// doubles, integers, and bracketed numeric lists).  Unknown keys are
/// config errors.
ExperimentConfig load_config_file(const std::string& path);

/// Apply one key/value pair; shared by the file parser and CLI overrides.
void apply_config_kv(ExperimentConfig& cfg, const std::string& key,
                     const std::string& value);

std::vector<double> parse_schedule(const std::string& text);

}  // namespace metamap

#endif
