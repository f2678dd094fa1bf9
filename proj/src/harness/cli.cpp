#include "pwgf/harness/cli.hpp"

#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "pwgf/errors.hpp"
#include "pwgf/harness/config.hpp"
#include "pwgf/harness/csv.hpp"
#include "pwgf/harness/experiments.hpp"

namespace pwgf::harness {
namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"--experiment", "experiment", "poisson_gan | toy_bernoulli | variance_bench"},
    {"--estimator", "estimator", "pwgf_mmd | pwgf_st | reinforce | muprop | exact (comma list allowed)"},
    {"--seeds", "seeds", "seed list, e.g. 1..10 or 1,4,9"},
    {"--epochs", "epochs", "training epochs (bench: discriminator snapshot epochs)"},
    {"--n-samples", "n_samples", "samples per estimator step"},
    {"--epsilon", "epsilon", "flow step size"},
    {"--gen-lr", "gen_lr", "generator learning rate"},
    {"--lr-scale-pwgf-mmd", "lr_scale_pwgf_mmd", "multiplier on --gen-lr for pwgf_mmd"},
    {"--lr-scale-pwgf-st", "lr_scale_pwgf_st", "multiplier on --gen-lr for pwgf_st"},
    {"--lr-scale-reinforce", "lr_scale_reinforce", "multiplier on --gen-lr for reinforce"},
    {"--lr-scale-muprop", "lr_scale_muprop", "multiplier on --gen-lr for muprop"},
    {"--disc-lr", "disc_lr", "discriminator learning rate"},
    {"--disc-weight-decay", "disc_weight_decay", "L2 penalty on discriminator weights"},
    {"--disc-steps", "disc_steps", "discriminator steps per generator step"},
    {"--bandwidth", "bandwidth", "median | <float>"},
    {"--lambda-true", "lambda_true", "rate of the target Poisson"},
    {"--init-param", "init_param", "initial rate or Bernoulli p"},
    {"--out", "out", "output CSV path"},
    {"--repeats", "repeats", "variance bench estimates per seed"},
    {"--reinforce-baseline", "reinforce_baseline", "moving-average REINFORCE baseline (true|false)"},
    {"--disc-hidden", "disc_hidden", "discriminator hidden widths, e.g. 32,32"},
    {"--jobs", "jobs", "replicates run concurrently"},
};

void write_output(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot open output file " + path);
  file << content;
  file.flush();
  if (!file) throw ConfigError("failed writing output file " + path);
}

void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  for (const auto& row : rows) {
    out << to_string(row.estimator) << ' ' << format_real(row.mean) << ' ' << format_real(row.std) << '\n';
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projected Wasserstein gradient flow experiments"};
  app.name(args.empty() ? "pwgf" : args.front());
  std::map<std::string, std::string> flag_values;
  for (const auto& spec : kFlags) app.add_option(spec.flag, flag_values[spec.key], spec.help);
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file; flags override its values");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  ExperimentConfig cfg;
  try {
    Settings settings;
    if (!config_path.empty()) settings = read_settings_file(config_path);
    for (const auto& spec : kFlags) {
      if (app.get_option(spec.flag)->count() > 0) settings[spec.key] = flag_values[spec.key];
    }
    if (settings.find("experiment") == settings.end()) {
      err << "error: --experiment is required\n\n" << app.help();
      return kExitConfig;
    }
    cfg = build_config(settings);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    std::ostringstream csv;
    bool aborted = false;
    if (cfg.experiment == ExperimentKind::VarianceBench) {
      const auto rows = run_variance_bench(cfg);
      write_variance_csv(csv, rows);
      for (const auto& row : rows) {
        out << to_string(row.estimator) << ' ' << format_real(row.mean) << ' ' << format_real(row.std) << '\n';
      }
    } else {
      const auto result =
          cfg.experiment == ExperimentKind::PoissonGan ? run_poisson_gan(cfg) : run_toy_bernoulli(cfg);
      write_curve_csv(csv, result.curve);
      print_summary(out, result.summary);
      for (const auto& [seed, estimator] : result.aborted) {
        err << "numeric divergence: seed " << seed << ", estimator " << to_string(estimator) << '\n';
      }
      aborted = !result.aborted.empty();
    }
    if (!cfg.out_path.empty()) write_output(cfg.out_path, csv.str());
    return aborted ? kExitNumeric : kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace pwgf::harness
