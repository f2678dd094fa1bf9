#include "pwgf/flow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "pwgf/errors.hpp"

namespace pwgf {
namespace {

using Index = Eigen::Index;

void require_mean_parameterized(const DiscreteDistribution& dist) {
  for (const auto& m : dist.marginals()) {
    if (!is_mean_parameterized(m)) throw UnsupportedError("projection needs Bernoulli or Poisson marginals");
  }
}

void require_matching_dims(const DiscreteDistribution& dist, const ParticleSet& tilde) {
  if (tilde.dim() != dist.dim()) throw InputError("particle dimension does not match the distribution");
}

}  // namespace

void FlowConfig::validate() const {
  if (!(epsilon > 0.0)) throw InputError("flow step size must be positive");
  if (n_particles < 1) throw InputError("flow needs at least one particle");
  if (projection == Projection::MmdGradient) {
    if (inner_steps < 1) throw InputError("MMD projection needs inner_steps >= 1");
    if (!(inner_lr > 0.0)) throw InputError("MMD projection needs a positive inner_lr");
  }
  if (bandwidth) KernelSpec{*bandwidth}.validate();
  if (!(mass_tol > 0.0 && mass_tol < 1.0)) throw InputError("mass_tol must lie in (0,1)");
}

ParticleSet wgf_step(const ParticleSet& particles, const CostFunction& cost, double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("flow step size must be positive");
  if (cost.dim() != particles.dim()) throw InputError("cost dimension does not match particles");
  Eigen::MatrixXd moved = particles.samples();
  for (Index n = 0; n < particles.size(); ++n) {
    const Eigen::VectorXd z = particles.particle(n).transpose();
    const Eigen::VectorXd g = cost.gradient(z);
    if (!g.allFinite()) throw NumericError("non-finite cost gradient at particle " + std::to_string(n), n);
    moved.row(n) -= epsilon * g.transpose();
  }
  return ParticleSet(std::move(moved));
}

Eigen::VectorXd clamp_parameters(const DiscreteDistribution& family, Eigen::VectorXd params) {
  for (Index i = 0; i < family.dim(); ++i) {
    if (std::holds_alternative<Bernoulli>(family.marginal(i))) {
      params(i) = std::clamp(params(i), kParameterFloor, 1.0 - kParameterFloor);
    } else if (std::holds_alternative<Poisson>(family.marginal(i))) {
      params(i) = std::max(params(i), kParameterFloor);
    }
  }
  return params;
}

DiscreteDistribution project_expectation_match(const DiscreteDistribution& current, const ParticleSet& tilde) {
  require_mean_parameterized(current);
  require_matching_dims(current, tilde);
  return with_parameters(current, clamp_parameters(current, tilde.mean()));
}

DiscreteDistribution project_bernoulli_exact(const ParticleSet& tilde) {
  std::vector<Marginal> out;
  for (Index i = 0; i < tilde.dim(); ++i) {
    const auto above = (tilde.coordinate(i).array() > 0.5).count();
    out.emplace_back(Bernoulli{static_cast<double>(above) / static_cast<double>(tilde.size())});
  }
  if (out.size() == 1) return DiscreteDistribution(out.front());
  return DiscreteDistribution(FactorizedProduct{std::move(out)});
}

DiscreteDistribution project_mmd(const DiscreteDistribution& current, const ParticleSet& tilde,
                                 const std::optional<KernelSpec>& kernel, const FlowConfig& cfg) {
  require_mean_parameterized(current);
  require_matching_dims(current, tilde);
  Eigen::VectorXd theta = parameters(current);
  for (Index i = 0; i < current.dim(); ++i) {
    const ParticleSet column = ParticleSet::from_values(tilde.coordinate(i));
    const KernelSpec k = kernel.value_or(KernelSpec{median_heuristic_bandwidth(column)});
    const bool bernoulli = std::holds_alternative<Bernoulli>(current.marginal(i));
    for (int step = 0; step < cfg.inner_steps; ++step) {
      const Marginal m = bernoulli ? Marginal(Bernoulli{theta(i)}) : Marginal(Poisson{theta(i)});
      const double g = mmd2_grad(m, column, k, cfg.mass_tol);
      if (!std::isfinite(g)) throw NumericError("non-finite MMD gradient in projection");
      theta(i) -= cfg.inner_lr * g;
      theta(i) = bernoulli ? std::clamp(theta(i), kParameterFloor, 1.0 - kParameterFloor)
                           : std::max(theta(i), kParameterFloor);
    }
  }
  return with_parameters(current, theta);
}

DiscreteDistribution project(const DiscreteDistribution& current, const ParticleSet& tilde, const FlowConfig& cfg) {
  switch (cfg.projection) {
    case Projection::ExpectationMatch:
      return project_expectation_match(current, tilde);
    case Projection::MmdGradient:
      return project_mmd(current, tilde,
                         cfg.bandwidth ? std::optional<KernelSpec>(KernelSpec{*cfg.bandwidth}) : std::nullopt, cfg);
    case Projection::ExactBernoulli:
      for (const auto& m : current.marginals()) {
        if (!std::holds_alternative<Bernoulli>(m)) throw UnsupportedError("exact projection is Bernoulli-only");
      }
      return project_bernoulli_exact(tilde);
  }
  throw UsageError("unknown projection");
}

double objective_value(const DiscreteDistribution& dist, const CostFunction& cost, double mass_tol,
                       const RngStream& rng, Index n_fallback, Index max_atoms) {
  try {
    const JointSupport support = enumerate_support(dist, mass_tol, max_atoms);
    double total = 0.0;
    for (Index r = 0; r < support.probs.size(); ++r) total += support.probs(r) * cost(support.atoms.row(r).transpose());
    return total;
  } catch (const CapacityError&) {
    const ParticleSet draws = sample(dist, n_fallback, rng);
    double total = 0.0;
    for (Index n = 0; n < draws.size(); ++n) total += cost(draws.particle(n).transpose());
    return total / static_cast<double>(draws.size());
  }
}

Trajectory pwgf_descent_loop(const DiscreteDistribution& initial, const CostFunction& cost, const FlowConfig& cfg,
                             Index iters, const RngStream& rng) {
  cfg.validate();
  require_mean_parameterized(initial);
  if (cfg.projection == Projection::ExactBernoulli) {
    for (const auto& m : initial.marginals()) {
      if (!std::holds_alternative<Bernoulli>(m)) throw UnsupportedError("exact projection is Bernoulli-only");
    }
  }

  const auto start = std::chrono::steady_clock::now();
  const RngStream eval_rng = rng.child(0xF00D);
  auto record = [&](Index k, const DiscreteDistribution& d) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return TrajectoryRecord{k, parameters(d), objective_value(d, cost, cfg.mass_tol, eval_rng.child(static_cast<std::uint64_t>(k))),
                            elapsed.count()};
  };

  Trajectory traj;
  DiscreteDistribution current = initial;
  traj.records.push_back(record(0, current));
  for (Index k = 1; k <= iters; ++k) {
    try {
      const ParticleSet z = sample(current, cfg.n_particles, rng.child(static_cast<std::uint64_t>(k)));
      const ParticleSet tilde = wgf_step(z, cost, cfg.epsilon);
      current = project(current, tilde, cfg);
      traj.records.push_back(record(k, current));
    } catch (const NumericError& e) {
      traj.abort_reason = "iteration " + std::to_string(k) + ": " + e.what();
      break;
    }
  }
  return traj;
}

}  // namespace pwgf
