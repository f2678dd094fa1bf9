#include "pwgf/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pwgf::harness {
namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string normalize_key(std::string_view key) {
  std::string out(trim(key));
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError("non-finite value for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean for " + std::string(key) + ": '" + std::string(text) + "'");
}

// Tuned values for the adversarial Poisson setting. The pWGF estimators
// scale with epsilon while the score-function ones do not, so each gets a
// multiplier on the shared generator rate.
void set_gan_defaults(ExperimentConfig& cfg) {
  cfg.epsilon = 16.0;
  cfg.gen_lr = 0.1;
  cfg.lr_scale = {{Estimator::PwgfMmd, 1.25}, {Estimator::PwgfSt, 1.0 / 32.0}};
  cfg.disc_lr = 3e-3;
  cfg.disc_weight_decay = 0.01;
  cfg.init_param = 4.0;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::PoissonGan:
      return "poisson_gan";
    case ExperimentKind::ToyBernoulli:
      return "toy_bernoulli";
    case ExperimentKind::VarianceBench:
      return "variance_bench";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment(std::string_view name) {
  for (auto kind : {ExperimentKind::PoissonGan, ExperimentKind::ToyBernoulli, ExperimentKind::VarianceBench}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

double ExperimentConfig::generator_lr(Estimator e) const {
  const auto it = lr_scale.find(e);
  return it == lr_scale.end() ? gen_lr : gen_lr * it->second;
}

void ExperimentConfig::validate() const {
  if (estimators.empty()) throw ConfigError("at least one estimator is required");
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(gen_lr > 0.0)) throw ConfigError("gen_lr must be positive");
  for (const auto& [e, scale] : lr_scale) {
    if (!(scale > 0.0)) throw ConfigError("lr_scale_" + std::string(to_string(e)) + " must be positive");
  }
  if (!(disc_lr > 0.0)) throw ConfigError("disc_lr must be positive");
  if (!(disc_weight_decay >= 0.0)) throw ConfigError("disc_weight_decay must be non-negative");
  if (disc_steps < 0) throw ConfigError("disc_steps must be non-negative");
  if (bandwidth && !(*bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
  if (!(lambda_true > 0.0)) throw ConfigError("lambda_true must be positive");
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  for (auto w : disc_hidden) {
    if (w < 1) throw ConfigError("hidden layer widths must be positive");
  }
  if (experiment == ExperimentKind::ToyBernoulli) {
    if (!(init_param >= 0.0 && init_param <= 1.0)) throw ConfigError("init_param must lie in [0, 1]");
  } else if (!(init_param > 0.0)) {
    throw ConfigError("init_param must be positive");
  }
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  switch (kind) {
    case ExperimentKind::PoissonGan:
      set_gan_defaults(cfg);
      break;
    case ExperimentKind::ToyBernoulli:
      cfg.epochs = 500;
      cfg.init_param = 0.5;
      break;
    case ExperimentKind::VarianceBench:
      set_gan_defaults(cfg);
      cfg.init_param = 4.5;
      cfg.seeds = {1};
      cfg.estimators = {Estimator::PwgfMmd, Estimator::PwgfSt, Estimator::Reinforce, Estimator::Muprop};
      break;
  }
  return cfg;
}

Settings parse_settings(std::string_view text) {
  Settings settings;
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = normalize_key(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    settings[key] = std::string(trim(line.substr(eq + 1)));
  }
  return settings;
}

Settings read_settings_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_settings(buffer.str());
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  for (auto part : split(text, ',')) {
    if (part.empty()) throw ConfigError("empty entry in seed list");
    if (const auto dots = part.find(".."); dots != std::string_view::npos) {
      const auto lo = parse_number<std::uint64_t>("seeds", part.substr(0, dots));
      const auto hi = parse_number<std::uint64_t>("seeds", part.substr(dots + 2));
      if (hi < lo) throw ConfigError("descending seed range " + std::string(part));
      if (hi - lo >= 1'000'000) throw ConfigError("seed range too large");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(parse_number<std::uint64_t>("seeds", part));
    }
  }
  return seeds;
}

void apply_setting(ExperimentConfig& cfg, std::string_view raw_key, std::string_view value) {
  const auto key = normalize_key(raw_key);
  value = trim(value);
  if (key == "experiment") {
    const auto kind = parse_experiment(value);
    if (!kind) throw ConfigError("unknown experiment '" + std::string(value) + "'");
    cfg.experiment = *kind;
  } else if (key == "estimator") {
    std::vector<Estimator> list;
    for (auto name : split(value, ',')) {
      const auto e = parse_estimator(name);
      if (!e) throw ConfigError("unknown estimator '" + std::string(name) + "'");
      list.push_back(*e);
    }
    cfg.estimators = std::move(list);
  } else if (key == "seeds") {
    cfg.seeds = parse_seed_list(value);
  } else if (key == "epochs") {
    cfg.epochs = parse_number<int>(key, value);
  } else if (key == "n_samples") {
    cfg.n_samples = parse_number<Eigen::Index>(key, value);
  } else if (key == "epsilon") {
    cfg.epsilon = parse_number<double>(key, value);
  } else if (key == "gen_lr") {
    cfg.gen_lr = parse_number<double>(key, value);
  } else if (key == "disc_lr") {
    cfg.disc_lr = parse_number<double>(key, value);
  } else if (key == "disc_weight_decay") {
    cfg.disc_weight_decay = parse_number<double>(key, value);
  } else if (key == "disc_steps") {
    cfg.disc_steps = parse_number<int>(key, value);
  } else if (key == "bandwidth") {
    if (value == "median") {
      cfg.bandwidth.reset();
    } else {
      cfg.bandwidth = parse_number<double>(key, value);
    }
  } else if (key == "lambda_true") {
    cfg.lambda_true = parse_number<double>(key, value);
  } else if (key == "init_param") {
    cfg.init_param = parse_number<double>(key, value);
  } else if (key == "reinforce_baseline") {
    cfg.reinforce_baseline = parse_bool(key, value);
  } else if (key == "repeats") {
    cfg.repeats = parse_number<int>(key, value);
  } else if (key == "disc_hidden") {
    std::vector<Eigen::Index> widths;
    for (auto w : split(value, ',')) widths.push_back(parse_number<Eigen::Index>(key, w));
    cfg.disc_hidden = std::move(widths);
  } else if (key == "out") {
    cfg.out_path = std::string(value);
  } else if (key == "jobs") {
    cfg.jobs = parse_number<int>(key, value);
  } else if (key.starts_with("lr_scale_")) {
    const auto e = parse_estimator(std::string_view(key).substr(9));
    if (!e) throw ConfigError("unknown setting '" + key + "'");
    cfg.lr_scale[*e] = parse_number<double>(key, value);
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

ExperimentConfig build_config(const Settings& settings) {
  const auto it = settings.find("experiment");
  if (it == settings.end()) throw ConfigError("no experiment selected");
  const auto kind = parse_experiment(trim(it->second));
  if (!kind) throw ConfigError("unknown experiment '" + it->second + "'");
  auto cfg = default_config(*kind);
  for (const auto& [key, value] : settings) apply_setting(cfg, key, value);
  cfg.validate();
  return cfg;
}

}  // namespace pwgf::harness
