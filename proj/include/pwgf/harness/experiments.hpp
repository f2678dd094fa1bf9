#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pwgf/cost.hpp"
#include "pwgf/distributions.hpp"
#include "pwgf/estimators.hpp"
#include "pwgf/harness/config.hpp"
#include "pwgf/mlp.hpp"

namespace pwgf::harness {

struct CurveRow {
  std::uint64_t seed = 0;
  int epoch = 0;
  Estimator estimator = Estimator::PwgfMmd;
  double param = 0.0;
  double gen_objective = 0.0;
  double disc_loss = 0.0;
};

using LearningCurve = std::vector<CurveRow>;

struct SummaryRow {
  Estimator estimator = Estimator::PwgfMmd;
  double mean = 0.0;
  double std = 0.0;
  Eigen::Index count = 0;
};

struct ExperimentResult {
  LearningCurve curve;
  std::vector<SummaryRow> summary;
  /// (seed, estimator) replicates stopped by numeric divergence.
  std::vector<std::pair<std::uint64_t, Estimator>> aborted;
};

/// Alternating discriminator/generator training of Pois(lambda) against
/// Pois(lambda_true). Rows are sorted by (seed, epoch, estimator).
ExperimentResult run_poisson_gan(const ExperimentConfig& cfg);

/// Minimizes E_{Bern(p)}[(z - 1)^2] = 1 - p by estimator-driven descent.
ExperimentResult run_toy_bernoulli(const ExperimentConfig& cfg);

struct VarianceRow {
  Estimator estimator = Estimator::PwgfMmd;
  Eigen::Index count = 0;
  double mean = 0.0;
  double exact = 0.0;  // exact gradient of E[f]
  double bias = 0.0;   // mean - exact
  double std = 0.0;
};

/// Repeated estimates at a fixed (dist, cost): seeds.size() * repeats draws
/// per estimator. Reports the first coordinate.
std::vector<VarianceRow> variance_bench(const DiscreteDistribution& dist, const CostFunction& cost,
                                        const std::vector<Estimator>& estimators, const EstimatorOptions& opts,
                                        const std::vector<std::uint64_t>& seeds, int repeats);

/// Variance bench at the Poisson GAN snapshot: the discriminator is trained
/// for epochs * disc_steps steps at lambda = init_param, then frozen.
std::vector<VarianceRow> run_variance_bench(const ExperimentConfig& cfg);

/// Discriminator training state of one GAN replicate.
struct Discriminator {
  Mlp<double> net;
  AdamState<double> opt;
  double weight_decay = 0.0;  // L2 coefficient on layer weights (not biases)
};

Discriminator make_discriminator(const ExperimentConfig& cfg, const RngStream& rng);

/// One sample-based step on E_fake[w] - E_real[w] + (weight_decay / 2) |W|^2;
/// returns the batch loss without the penalty.
double discriminator_step(Discriminator& disc, const Eigen::Ref<const Eigen::VectorXd>& fake,
                          const Eigen::Ref<const Eigen::VectorXd>& real);

/// Generator cost f(z) = -w(z) under the descent convention.
CostFunction generator_cost(const Mlp<double>& net);

/// Mean and sample std of the parameter at `final_epoch` per estimator.
/// Replicates that stopped earlier are left out.
std::vector<SummaryRow> summarize_final(const LearningCurve& curve, const std::vector<Estimator>& estimators,
                                        int final_epoch);

}  // namespace pwgf::harness
