#include "pwgf/estimators.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "pwgf/errors.hpp"
#include "pwgf/flow.hpp"

namespace pwgf {
namespace {

using Index = Eigen::Index;

constexpr double kEps = std::numeric_limits<double>::epsilon();

constexpr std::array<std::pair<Estimator, std::string_view>, 5> kNames{{
    {Estimator::PwgfMmd, "pwgf_mmd"},
    {Estimator::PwgfSt, "pwgf_st"},
    {Estimator::Reinforce, "reinforce"},
    {Estimator::Muprop, "muprop"},
    {Estimator::Exact, "exact"},
}};

void require_mean_parameterized(const DiscreteDistribution& dist) {
  for (const auto& m : dist.marginals()) {
    if (!is_mean_parameterized(m)) throw UnsupportedError("estimator needs Bernoulli or Poisson marginals");
  }
}

void require_cost_dim(const DiscreteDistribution& dist, const CostFunction& cost) {
  if (cost.dim() != dist.dim()) throw InputError("cost dimension does not match the distribution");
}

// Distinct values of an empirical cloud with their relative frequencies.
SupportTable empirical_table(const Eigen::VectorXd& values) {
  std::map<double, double> counts;
  for (const double v : values) counts[v] += 1.0;
  SupportTable table{Eigen::VectorXd(static_cast<Index>(counts.size())),
                     Eigen::VectorXd(static_cast<Index>(counts.size()))};
  Index i = 0;
  for (const auto& [v, c] : counts) {
    table.atoms(i) = v;
    table.probs(i) = c / static_cast<double>(values.size());
    ++i;
  }
  return table;
}

Eigen::VectorXd checked_gradient(const CostFunction& cost, const Eigen::VectorXd& z, Index n) {
  Eigen::VectorXd g = cost.gradient(z);
  if (!g.allFinite()) throw NumericError("non-finite cost gradient at sample " + std::to_string(n), n);
  return g;
}

}  // namespace

std::string_view to_string(Estimator e) {
  for (const auto& [tag, name] : kNames) {
    if (tag == e) return name;
  }
  return "unknown";
}

std::optional<Estimator> parse_estimator(std::string_view name) {
  for (const auto& [tag, n] : kNames) {
    if (n == name) return tag;
  }
  return std::nullopt;
}

GradientEstimate exact_gradient_oracle(const DiscreteDistribution& dist, const CostFunction& cost, double mass_tol,
                                       Index max_atoms) {
  require_mean_parameterized(dist);
  require_cost_dim(dist, cost);
  const JointSupport support = enumerate_support(dist, mass_tol, max_atoms);
  const Index d = dist.dim();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
  for (Index r = 0; r < support.probs.size(); ++r) {
    const double f = cost(support.atoms.row(r).transpose());
    for (Index i = 0; i < d; ++i) {
      // d/dtheta_i of the product mass: swap in the derivative of marginal i.
      double dmass = pmf_derivative(dist.marginal(i), support.atoms(r, i));
      for (Index j = 0; j < d && dmass != 0.0; ++j) {
        if (j != i) dmass *= pmf(dist.marginal(j), support.atoms(r, j));
      }
      grad(i) += dmass * f;
    }
  }
  return {std::move(grad), support.probs.size(), Estimator::Exact};
}

GradientEstimate st_pwgf_grad(const DiscreteDistribution& dist, const CostFunction& cost, Index n, double epsilon,
                              const RngStream& rng) {
  require_mean_parameterized(dist);
  require_cost_dim(dist, cost);
  if (!(epsilon > 0.0)) throw InputError("flow step size must be positive");
  const ParticleSet z = sample(dist, n, rng);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dist.dim());
  for (Index s = 0; s < z.size(); ++s) sum += checked_gradient(cost, z.particle(s).transpose(), s);
  return {2.0 * epsilon * (sum / static_cast<double>(n)), n, Estimator::PwgfSt};
}

GradientEstimate mmd_pwgf_grad(const DiscreteDistribution& dist, const CostFunction& cost, Index n, double epsilon,
                               const std::optional<KernelSpec>& kernel, const RngStream& rng, double mass_tol) {
  require_mean_parameterized(dist);
  require_cost_dim(dist, cost);
  const ParticleSet tilde = wgf_step(sample(dist, n, rng), cost, epsilon);
  Eigen::VectorXd grad(dist.dim());
  for (Index i = 0; i < dist.dim(); ++i) {
    const Eigen::VectorXd column = tilde.coordinate(i);
    const KernelSpec k = kernel.value_or(KernelSpec{median_heuristic_bandwidth(column)});
    grad(i) = mmd2_grad(dist.marginal(i), empirical_table(column), k, mass_tol);
  }
  return {std::move(grad), n, Estimator::PwgfMmd};
}

GradientEstimate reinforce_grad(const DiscreteDistribution& dist, const CostFunction& cost, Index n,
                                const RngStream& rng, std::optional<double> baseline) {
  require_mean_parameterized(dist);
  require_cost_dim(dist, cost);
  const double b = baseline.value_or(0.0);
  const ParticleSet z = sample(dist, n, rng);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dist.dim());
  for (Index s = 0; s < z.size(); ++s) {
    const Eigen::VectorXd zs = z.particle(s).transpose();
    sum += (cost(zs) - b) * score(dist, zs);
  }
  return {sum / static_cast<double>(n), n, Estimator::Reinforce};
}

GradientEstimate muprop_grad(const DiscreteDistribution& dist, const CostFunction& cost, Index n,
                             const RngStream& rng) {
  require_mean_parameterized(dist);
  require_cost_dim(dist, cost);
  const Eigen::VectorXd zbar = mean(dist);
  const double f_bar = cost(zbar);
  const Eigen::VectorXd g_bar = cost.gradient(zbar);
  if (!g_bar.allFinite()) throw NumericError("non-finite cost gradient at the distribution mean");
  const ParticleSet z = sample(dist, n, rng);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dist.dim());
  for (Index s = 0; s < z.size(); ++s) {
    const Eigen::VectorXd zs = z.particle(s).transpose();
    const double f = cost(zs);
    const double taylor = g_bar.dot(zs - zbar);
    double residual = f - f_bar - taylor;
    // A residual at the rounding level of its terms is a Taylor-exact point.
    if (std::abs(residual) <= 8.0 * kEps * (std::abs(f) + std::abs(f_bar) + std::abs(taylor))) residual = 0.0;
    sum += residual * score(dist, zs);
  }
  // Mean parameterization: d zbar / d theta is the identity.
  return {sum / static_cast<double>(n) + g_bar, n, Estimator::Muprop};
}

GradientEstimate estimate_gradient(Estimator which, const DiscreteDistribution& dist, const CostFunction& cost,
                                   const EstimatorOptions& opts, const RngStream& rng) {
  switch (which) {
    case Estimator::PwgfMmd:
      return mmd_pwgf_grad(dist, cost, opts.n_samples, opts.epsilon, opts.kernel, rng, opts.mass_tol);
    case Estimator::PwgfSt:
      return st_pwgf_grad(dist, cost, opts.n_samples, opts.epsilon, rng);
    case Estimator::Reinforce:
      return reinforce_grad(dist, cost, opts.n_samples, rng, opts.baseline);
    case Estimator::Muprop:
      return muprop_grad(dist, cost, opts.n_samples, rng);
    case Estimator::Exact:
      return exact_gradient_oracle(dist, cost, opts.mass_tol);
  }
  throw UsageError("unknown estimator");
}

}  // namespace pwgf
