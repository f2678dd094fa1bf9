#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pwgf/estimators.hpp"

namespace pwgf::harness {

enum class ExperimentKind { PoissonGan, ToyBernoulli, VarianceBench };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment(std::string_view name);

/// Raised for unknown keys, malformed values and invalid combinations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::PoissonGan;
  std::vector<Estimator> estimators{Estimator::PwgfMmd};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int epochs = 100;
  Eigen::Index n_samples = 100;
  double epsilon = 0.1;
  double gen_lr = 0.05;
  std::map<Estimator, double> lr_scale;  // per-estimator multiplier on gen_lr, 1 when absent
  double disc_lr = 1e-3;
  int disc_steps = 5;
  double disc_weight_decay = 0.0;
  std::optional<double> bandwidth;  // median heuristic when empty
  double lambda_true = 5.0;
  double init_param = 0.5;
  bool reinforce_baseline = false;
  int repeats = 100;  // variance bench estimates per seed
  std::vector<Eigen::Index> disc_hidden{32, 32};
  std::string out_path;
  int jobs = 1;

  /// Generator learning rate used with estimator `e`.
  double generator_lr(Estimator e) const;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Defaults for one experiment, before any file or flag overrides.
ExperimentConfig default_config(ExperimentKind kind);

/// Flat key=value settings. Keys use '_' or '-' interchangeably.
using Settings = std::map<std::string, std::string>;

/// Parse `key = value` lines; '#' starts a comment. Throws ConfigError.
Settings parse_settings(std::string_view text);
Settings read_settings_file(const std::filesystem::path& path);

/// Apply one setting. Throws ConfigError for unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Build a config: experiment defaults, then `settings` in key order.
/// The "experiment" key (required) selects the defaults.
ExperimentConfig build_config(const Settings& settings);

/// "1..10", "3,5,8" or a mix such as "1..3,7".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace pwgf::harness
