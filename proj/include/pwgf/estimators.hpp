#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "pwgf/cost.hpp"
#include "pwgf/distributions.hpp"
#include "pwgf/mmd.hpp"
#include "pwgf/rng.hpp"

namespace pwgf {

enum class Estimator { PwgfMmd, PwgfSt, Reinforce, Muprop, Exact };

std::string_view to_string(Estimator e);
std::optional<Estimator> parse_estimator(std::string_view name);

/// Gradient of E[f] (or of the projection objective, for the pWGF
/// estimators) with respect to the mean parameters, one entry per coordinate.
/// Callers descend: theta <- theta - lr * grad.
struct GradientEstimate {
  Eigen::VectorXd grad;
  Eigen::Index n_samples = 0;
  Estimator estimator = Estimator::Exact;
};

/// sum_z d p_theta(z) / d theta * f(z) over the truncated (product) support.
/// Throws CapacityError beyond max_atoms support points.
GradientEstimate exact_gradient_oracle(const DiscreteDistribution& dist, const CostFunction& cost,
                                       double mass_tol = kDefaultMassTol, Eigen::Index max_atoms = 1'000'000);

/// Straight-through estimate as the gradient of the expectation-matching
/// projection objective: (2 eps / N) sum_n grad f(z_n).
GradientEstimate st_pwgf_grad(const DiscreteDistribution& dist, const CostFunction& cost, Eigen::Index n,
                              double epsilon, const RngStream& rng);

/// MMD projection gradient d mmd2(theta; z~) / d theta with z~ = z - eps grad
/// f(z). Without a kernel the bandwidth is the median heuristic of each
/// coordinate of z~.
GradientEstimate mmd_pwgf_grad(const DiscreteDistribution& dist, const CostFunction& cost, Eigen::Index n,
                               double epsilon, const std::optional<KernelSpec>& kernel, const RngStream& rng,
                               double mass_tol = kDefaultMassTol);

/// Score-function estimate (1/N) sum_n (f(z_n) - b) score(z_n).
GradientEstimate reinforce_grad(const DiscreteDistribution& dist, const CostFunction& cost, Eigen::Index n,
                                const RngStream& rng, std::optional<double> baseline = std::nullopt);

/// Score-function estimate with the first-order Taylor expansion of f at the
/// mean as control variate, plus its analytic expectation grad f(mean).
GradientEstimate muprop_grad(const DiscreteDistribution& dist, const CostFunction& cost, Eigen::Index n,
                             const RngStream& rng);

/// Exponential moving average of observed costs, used as REINFORCE baseline.
class MovingAverageBaseline {
 public:
  explicit MovingAverageBaseline(double decay = 0.9) : decay_(decay) {}

  std::optional<double> value() const { return value_; }
  void update(double observed) { value_ = value_ ? decay_ * *value_ + (1.0 - decay_) * observed : observed; }

 private:
  double decay_;
  std::optional<double> value_;
};

struct EstimatorOptions {
  Eigen::Index n_samples = 100;
  double epsilon = 0.1;
  std::optional<KernelSpec> kernel;  // pwgf_mmd; median heuristic when empty
  std::optional<double> baseline;    // reinforce
  double mass_tol = kDefaultMassTol;
};

/// Dispatch to the estimator named by `which`.
GradientEstimate estimate_gradient(Estimator which, const DiscreteDistribution& dist, const CostFunction& cost,
                                   const EstimatorOptions& opts, const RngStream& rng);

}  // namespace pwgf
