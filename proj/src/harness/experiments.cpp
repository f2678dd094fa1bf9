#include "pwgf/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <thread>
#include <tuple>

#include "pwgf/errors.hpp"
#include "pwgf/flow.hpp"

namespace pwgf::harness {
namespace {

constexpr std::uint64_t kDiscInitStream = 0;
constexpr std::uint64_t kFakeStream = 1;
constexpr std::uint64_t kRealStream = 2;
constexpr std::uint64_t kGeneratorStream = 3;
constexpr std::uint64_t kBenchStream = 1;

// Mean and sample standard deviation, centered on the first value so that
// identical inputs report exactly zero spread.
std::pair<double, double> mean_and_std(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::ArrayXd d = v.array() - v(0);
  const double shift = d.mean();
  const double sd = v.size() >= 2 ? std::sqrt((d - shift).square().sum() / static_cast<double>(v.size() - 1))
                                  : std::nan("");
  return {v(0) + shift, sd};
}

struct Replicate {
  LearningCurve rows;
  bool aborted = false;
};

// Sample weights grouped by distinct value: Poisson batches repeat values, so
// one forward/backward pass per atom suffices.
std::map<double, double> grouped_weights(const Eigen::Ref<const Eigen::VectorXd>& values, double weight) {
  std::map<double, double> groups;
  for (Eigen::Index i = 0; i < values.size(); ++i) groups[values(i)] += weight;
  return groups;
}

double expected_output(const Mlp<double>& net, const SupportTable& support) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < support.size(); ++k) {
    total += support.probs(k) * mlp_forward(net, support.atoms(k)).output;
  }
  return total;
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Each slot is
// written by exactly one task, so the result does not depend on scheduling.
void run_tasks(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ExperimentResult collect(const ExperimentConfig& cfg, std::vector<Replicate>& reps) {
  ExperimentResult result;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    auto& rep = reps[i];
    if (rep.aborted) {
      result.aborted.emplace_back(cfg.seeds[i % cfg.seeds.size()], cfg.estimators[i / cfg.seeds.size()]);
    }
    result.curve.insert(result.curve.end(), rep.rows.begin(), rep.rows.end());
  }
  const auto rank = [&](Estimator e) {
    return std::find(cfg.estimators.begin(), cfg.estimators.end(), e) - cfg.estimators.begin();
  };
  std::stable_sort(result.curve.begin(), result.curve.end(), [&](const CurveRow& a, const CurveRow& b) {
    return std::tuple(a.seed, a.epoch, rank(a.estimator)) < std::tuple(b.seed, b.epoch, rank(b.estimator));
  });
  result.summary = summarize_final(result.curve, cfg.estimators, cfg.epochs);
  return result;
}

template <typename Body>
ExperimentResult run_replicates(const ExperimentConfig& cfg, Body body) {
  cfg.validate();
  const std::size_t n_seeds = cfg.seeds.size();
  std::vector<Replicate> reps(n_seeds * cfg.estimators.size());
  run_tasks(reps.size(), cfg.jobs, [&](std::size_t i) {
    reps[i] = body(cfg.estimators[i / n_seeds], cfg.seeds[i % n_seeds]);
  });
  return collect(cfg, reps);
}

EstimatorOptions estimator_options(const ExperimentConfig& cfg) {
  EstimatorOptions opts;
  opts.n_samples = cfg.n_samples;
  opts.epsilon = cfg.epsilon;
  if (cfg.bandwidth) opts.kernel = KernelSpec{*cfg.bandwidth};
  return opts;
}

double batch_mean_cost(const CostFunction& cost, const ParticleSet& z) {
  double total = 0.0;
  for (Eigen::Index n = 0; n < z.size(); ++n) total += cost(z.particle(n));
  return total / static_cast<double>(z.size());
}

Replicate gan_replicate(const ExperimentConfig& cfg, Estimator estimator, std::uint64_t seed) {
  const RngStream root(seed);
  Replicate rep;
  Discriminator disc = make_discriminator(cfg, root.child(kDiscInitStream));
  const DiscreteDistribution truth = Poisson{cfg.lambda_true};
  auto opts = estimator_options(cfg);
  MovingAverageBaseline baseline;
  double lambda = cfg.init_param;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const RngStream rng = root.child(static_cast<std::uint64_t>(epoch));
    try {
      const DiscreteDistribution gen = Poisson{lambda};
      double loss = 0.0;
      for (int s = 0; s < std::max(cfg.disc_steps, 1); ++s) {
        const auto fake = sample(gen, cfg.n_samples, rng.child(kFakeStream).child(s));
        const auto real = sample(truth, cfg.n_samples, rng.child(kRealStream).child(s));
        if (s < cfg.disc_steps) {
          loss = discriminator_step(disc, fake.values(), real.values());
        } else {
          loss = 0.0;
          for (const auto& [z, w] : grouped_weights(fake.values(), 1.0 / static_cast<double>(fake.size()))) {
            loss += w * mlp_forward(disc.net, z).output;
          }
          for (const auto& [z, w] : grouped_weights(real.values(), 1.0 / static_cast<double>(real.size()))) {
            loss -= w * mlp_forward(disc.net, z).output;
          }
        }
      }
      if (!disc.net.all_finite()) throw NumericError("non-finite discriminator weights");

      const CostFunction cost = generator_cost(disc.net);
      const RngStream gen_rng = rng.child(kGeneratorStream);
      const bool use_baseline = cfg.reinforce_baseline && estimator == Estimator::Reinforce;
      if (use_baseline) opts.baseline = baseline.value();
      const auto estimate = estimate_gradient(estimator, gen, cost, opts, gen_rng);
      if (use_baseline) baseline.update(batch_mean_cost(cost, sample(gen, cfg.n_samples, gen_rng)));

      const double next = lambda - cfg.generator_lr(estimator) * estimate.grad(0);
      if (!std::isfinite(next)) throw NumericError("non-finite generator parameter");
      lambda = std::max(next, kParameterFloor);

      const double objective = expected_output(disc.net, truncated_support(Marginal{Poisson{lambda}}));
      rep.rows.push_back({seed, epoch, estimator, lambda, objective, loss});
    } catch (const NumericError&) {
      rep.aborted = true;
      break;
    }
  }
  return rep;
}

Replicate toy_replicate(const ExperimentConfig& cfg, Estimator estimator, std::uint64_t seed) {
  const RngStream root(seed);
  Replicate rep;
  const CostFunction cost = squared_distance_cost(1.0);
  const auto opts = estimator_options(cfg);
  double p = std::clamp(cfg.init_param, kParameterFloor, 1.0 - kParameterFloor);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    try {
      const auto estimate =
          estimate_gradient(estimator, Bernoulli{p}, cost, opts, root.child(static_cast<std::uint64_t>(epoch)));
      const double next = p - cfg.generator_lr(estimator) * estimate.grad(0);
      if (!std::isfinite(next)) throw NumericError("non-finite Bernoulli parameter");
      p = std::clamp(next, kParameterFloor, 1.0 - kParameterFloor);
      rep.rows.push_back({seed, epoch, estimator, p, 1.0 - p, 0.0});
    } catch (const NumericError&) {
      rep.aborted = true;
      break;
    }
  }
  return rep;
}

}  // namespace

Discriminator make_discriminator(const ExperimentConfig& cfg, const RngStream& rng) {
  std::vector<Eigen::Index> widths{1};
  widths.insert(widths.end(), cfg.disc_hidden.begin(), cfg.disc_hidden.end());
  widths.push_back(1);
  auto net = Mlp<double>::glorot(widths, rng);
  auto opt = AdamState<double>::for_net(net, cfg.disc_lr);
  return {std::move(net), std::move(opt), cfg.disc_weight_decay};
}

double discriminator_step(Discriminator& disc, const Eigen::Ref<const Eigen::VectorXd>& fake,
                          const Eigen::Ref<const Eigen::VectorXd>& real) {
  if (fake.size() == 0 || real.size() == 0) throw InputError("discriminator batches must be nonempty");
  auto grads = zero_gradients(disc.net);
  double loss = 0.0;
  const auto pass = [&](const Eigen::Ref<const Eigen::VectorXd>& batch, double sign) {
    for (const auto& [z, weight] : grouped_weights(batch, sign / static_cast<double>(batch.size()))) {
      const auto fwd = mlp_forward(disc.net, z);
      loss += weight * fwd.output;
      accumulate(grads, mlp_backward(disc.net, fwd.cache, 1.0).grads, weight);
    }
  };
  pass(fake, 1.0);
  pass(real, -1.0);
  if (disc.weight_decay > 0.0) {
    for (std::size_t l = 0; l < grads.size(); ++l) grads[l].weight += disc.weight_decay * disc.net.layers()[l].weight;
  }
  adam_step(disc.net, grads, disc.opt);
  return loss;
}

CostFunction generator_cost(const Mlp<double>& net) {
  // Evaluations are memoized per atom: Poisson samples repeat integer values.
  struct Memo {
    Mlp<double> net;
    std::map<double, std::pair<double, double>> values;  // z -> (w, dw/dz)

    const std::pair<double, double>& at(double z) {
      auto it = values.find(z);
      if (it == values.end()) {
        const auto fwd = mlp_forward(net, z);
        it = values.emplace(z, std::pair{fwd.output, mlp_backward(net, fwd.cache, 1.0).dz}).first;
      }
      return it->second;
    }
  };
  auto memo = std::make_shared<Memo>(Memo{net, {}});
  return CostFunction(
      1, [memo](const Eigen::VectorXd& z) { return -memo->at(z(0)).first; },
      [memo](const Eigen::VectorXd& z) { return Eigen::VectorXd::Constant(1, -memo->at(z(0)).second); });
}

std::vector<SummaryRow> summarize_final(const LearningCurve& curve, const std::vector<Estimator>& estimators,
                                        int final_epoch) {
  std::vector<SummaryRow> out;
  for (const auto e : estimators) {
    std::vector<double> finals;
    for (const auto& row : curve) {
      if (row.estimator == e && row.epoch == final_epoch) finals.push_back(row.param);
    }
    SummaryRow s{e, 0.0, 0.0, static_cast<Eigen::Index>(finals.size())};
    if (!finals.empty()) {
      std::tie(s.mean, s.std) =
          mean_and_std(Eigen::Map<const Eigen::VectorXd>(finals.data(), static_cast<Eigen::Index>(finals.size())));
    } else {
      s.mean = std::nan("");
      s.std = std::nan("");
    }
    out.push_back(s);
  }
  return out;
}

ExperimentResult run_poisson_gan(const ExperimentConfig& cfg) {
  return run_replicates(cfg, [&](Estimator e, std::uint64_t seed) { return gan_replicate(cfg, e, seed); });
}

ExperimentResult run_toy_bernoulli(const ExperimentConfig& cfg) {
  return run_replicates(cfg, [&](Estimator e, std::uint64_t seed) { return toy_replicate(cfg, e, seed); });
}

std::vector<VarianceRow> variance_bench(const DiscreteDistribution& dist, const CostFunction& cost,
                                        const std::vector<Estimator>& estimators, const EstimatorOptions& opts,
                                        const std::vector<std::uint64_t>& seeds, int repeats) {
  if (seeds.empty() || repeats < 1) throw InputError("variance bench needs seeds and repeats >= 1");
  const double exact = exact_gradient_oracle(dist, cost, opts.mass_tol).grad(0);
  std::vector<VarianceRow> rows;
  for (const auto e : estimators) {
    Eigen::VectorXd draws(static_cast<Eigen::Index>(seeds.size()) * repeats);
    Eigen::Index k = 0;
    for (const auto seed : seeds) {
      for (int r = 0; r < repeats; ++r) {
        draws(k++) = estimate_gradient(e, dist, cost, opts, RngStream(seed, kBenchStream).child(static_cast<std::uint64_t>(r))).grad(0);
      }
    }
    VarianceRow row{e, draws.size(), 0.0, exact, 0.0, 0.0};
    std::tie(row.mean, row.std) = mean_and_std(draws);
    if (draws.size() < 2) row.std = 0.0;
    row.bias = row.mean - exact;
    rows.push_back(row);
  }
  return rows;
}

std::vector<VarianceRow> run_variance_bench(const ExperimentConfig& cfg) {
  cfg.validate();
  const RngStream root(cfg.seeds.front());
  Discriminator disc = make_discriminator(cfg, root.child(kDiscInitStream));
  const DiscreteDistribution gen = Poisson{cfg.init_param};
  const DiscreteDistribution truth = Poisson{cfg.lambda_true};
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const RngStream rng = root.child(static_cast<std::uint64_t>(epoch));
    for (int s = 0; s < cfg.disc_steps; ++s) {
      discriminator_step(disc, sample(gen, cfg.n_samples, rng.child(kFakeStream).child(s)).values(),
                         sample(truth, cfg.n_samples, rng.child(kRealStream).child(s)).values());
    }
  }
  if (!disc.net.all_finite()) throw NumericError("non-finite discriminator weights");
  auto opts = estimator_options(cfg);
  return variance_bench(gen, generator_cost(disc.net), cfg.estimators, opts, cfg.seeds, cfg.repeats);
}

}  // namespace pwgf::harness
