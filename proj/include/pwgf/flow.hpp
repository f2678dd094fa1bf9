#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pwgf/cost.hpp"
#include "pwgf/distributions.hpp"
#include "pwgf/mmd.hpp"
#include "pwgf/particles.hpp"
#include "pwgf/rng.hpp"

namespace pwgf {

/// Lower clamp for Bernoulli p and Poisson rates (and 1 - p upper clamp).
inline constexpr double kParameterFloor = 1e-6;

enum class Projection { ExpectationMatch, MmdGradient, ExactBernoulli };

struct FlowConfig {
  double epsilon = 0.1;
  Eigen::Index n_particles = 64;
  Projection projection = Projection::ExpectationMatch;
  int inner_steps = 10;
  double inner_lr = 1.0;
  /// Fixed RBF bandwidth for MMD projection; median heuristic when empty.
  std::optional<double> bandwidth;
  double mass_tol = kDefaultMassTol;

  /// Throws InputError on an invalid configuration.
  void validate() const;
};

struct TrajectoryRecord {
  Eigen::Index iteration = 0;
  Eigen::VectorXd params;
  double objective = 0.0;  // F[mu_k]
  double wall_seconds = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  /// Set when the loop stopped early on a numeric error.
  std::optional<std::string> abort_reason;

  bool aborted() const { return abort_reason.has_value(); }
};

/// Push particles along the descent flow: z - epsilon * grad f(z). Throws
/// NumericError naming the first particle with a non-finite gradient.
ParticleSet wgf_step(const ParticleSet& particles, const CostFunction& cost, double epsilon);

/// Clamp mean parameters into the open domain of each coordinate's family.
Eigen::VectorXd clamp_parameters(const DiscreteDistribution& family, Eigen::VectorXd params);

/// Family member whose mean matches the cloud mean in every coordinate.
DiscreteDistribution project_expectation_match(const DiscreteDistribution& current, const ParticleSet& tilde);

/// Exact W^2 projection onto Bernoulli: p* = #{y > 1/2} / N per coordinate.
/// A d-dimensional cloud yields a product of d Bernoulli marginals.
DiscreteDistribution project_bernoulli_exact(const ParticleSet& tilde);

/// Warm-started MMD projection: cfg.inner_steps clamped gradient steps on
/// mmd2 from the current parameters, coordinatewise. With no kernel given the
/// bandwidth is the median heuristic of each coordinate of the cloud.
DiscreteDistribution project_mmd(const DiscreteDistribution& current, const ParticleSet& tilde,
                                 const std::optional<KernelSpec>& kernel, const FlowConfig& cfg);

/// Projection selected by cfg.projection.
DiscreteDistribution project(const DiscreteDistribution& current, const ParticleSet& tilde, const FlowConfig& cfg);

/// F[mu] = E_mu[f], by exact enumeration of the truncated support when it has
/// at most max_atoms atoms, else a Monte Carlo average of n_fallback draws.
double objective_value(const DiscreteDistribution& dist, const CostFunction& cost, double mass_tol,
                       const RngStream& rng, Eigen::Index n_fallback = 4096, Eigen::Index max_atoms = 1'000'000);

/// Sample -> flow step -> projection, `iters` times. Record 0 holds the
/// initial distribution. Numeric failures end the loop early and are reported
/// through Trajectory::abort_reason.
Trajectory pwgf_descent_loop(const DiscreteDistribution& initial, const CostFunction& cost, const FlowConfig& cfg,
                             Eigen::Index iters, const RngStream& rng);

}  // namespace pwgf
