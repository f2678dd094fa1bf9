#include "pwgf/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pwgf/errors.hpp"

namespace pwgf {
namespace {

using Index = Eigen::Index;

SupportTable uniform_table(const ParticleSet& tilde) {
  const auto values = tilde.values();
  return {values, Eigen::VectorXd::Constant(values.size(), 1.0 / static_cast<double>(values.size()))};
}

// The parametric side of the discrepancy. Bernoulli keeps both atoms even
// when one carries (almost) no mass so its derivative stays exact.
SupportTable parametric_support(const Marginal& mu, double mass_tol) {
  if (const auto* b = std::get_if<Bernoulli>(&mu)) {
    return {Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(1.0 - b->p, b->p)};
  }
  return truncated_support(mu, mass_tol);
}

// Weight derivatives d pmf(atom) / d theta over the truncated support.
Eigen::VectorXd parameter_derivatives(const Marginal& mu, const SupportTable& support) {
  if (!is_mean_parameterized(mu)) throw UnsupportedError("MMD gradient is defined for Bernoulli and Poisson only");
  Eigen::VectorXd d(support.size());
  for (Index i = 0; i < support.size(); ++i) d(i) = pmf_derivative(mu, support.atoms(i));
  return d;
}

}  // namespace

void KernelSpec::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InputError("kernel bandwidth must be positive, got " + std::to_string(bandwidth));
  }
}

double median_heuristic_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& values) {
  const Index n = values.size();
  if (n < 2) return 1.0;
  // Distinct values with multiplicities; the pairwise gaps then come in
  // weighted groups and the median is read off their cumulative counts.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> groups;
  for (const double v : sorted) {
    if (!groups.empty() && groups.back().first == v) {
      groups.back().second += 1.0;
    } else {
      groups.emplace_back(v, 1.0);
    }
  }
  std::vector<std::pair<double, double>> gaps;
  double ties = 0.0;
  for (const auto& [v, c] : groups) ties += 0.5 * c * (c - 1.0);
  if (ties > 0.0) gaps.emplace_back(0.0, ties);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      gaps.emplace_back(std::abs(groups[i].first - groups[j].first), groups[i].second * groups[j].second);
    }
  }
  std::sort(gaps.begin(), gaps.end());
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double mid = std::floor(total / 2.0);
  // Value at zero-based rank r of the expanded gap list.
  auto at_rank = [&gaps](double r) {
    double seen = 0.0;
    for (const auto& [gap, count] : gaps) {
      seen += count;
      if (r < seen) return gap;
    }
    return gaps.back().first;
  };
  double median = at_rank(mid);
  if (std::fmod(total, 2.0) == 0.0) median = 0.5 * (median + at_rank(mid - 1.0));
  return median > 0.0 ? median : 1.0;
}

double median_heuristic_bandwidth(const ParticleSet& particles) {
  return median_heuristic_bandwidth(particles.values());
}

double mmd2(const Marginal& mu, const SupportTable& tilde, const KernelSpec& k, double mass_tol) {
  k.validate();
  const SupportTable support = parametric_support(mu, mass_tol);
  const Eigen::MatrixXd k_mm = rbf_gram(support.atoms, support.atoms, k);
  const Eigen::MatrixXd k_tt = rbf_gram(tilde.atoms, tilde.atoms, k);
  const Eigen::MatrixXd k_mt = rbf_gram(support.atoms, tilde.atoms, k);
  return support.probs.dot(k_mm * support.probs) + tilde.probs.dot(k_tt * tilde.probs) -
         2.0 * support.probs.dot(k_mt * tilde.probs);
}

double mmd2(const Marginal& mu, const ParticleSet& tilde, const KernelSpec& k, double mass_tol) {
  return mmd2(mu, uniform_table(tilde), k, mass_tol);
}

double mmd2_grad(const Marginal& mu, const SupportTable& tilde, const KernelSpec& k, double mass_tol) {
  k.validate();
  if (const auto* b = std::get_if<Bernoulli>(&mu)) {
    const double k10 = rbf_kernel(1.0, 0.0, k);
    double cloud = 0.0;
    for (Index n = 0; n < tilde.size(); ++n) {
      cloud += tilde.probs(n) * (rbf_kernel(1.0, tilde.atoms(n), k) - rbf_kernel(0.0, tilde.atoms(n), k));
    }
    return -2.0 * (1.0 - 2.0 * b->p) * (1.0 - k10) - 2.0 * cloud;
  }
  const SupportTable support = parametric_support(mu, mass_tol);
  const Eigen::VectorXd dprobs = parameter_derivatives(mu, support);
  const Eigen::MatrixXd k_mm = rbf_gram(support.atoms, support.atoms, k);
  const Eigen::MatrixXd k_mt = rbf_gram(support.atoms, tilde.atoms, k);
  // d/dtheta [p' K p] = 2 p'' K p by symmetry; the cloud term is constant.
  return 2.0 * dprobs.dot(k_mm * support.probs) - 2.0 * dprobs.dot(k_mt * tilde.probs);
}

double mmd2_grad(const Marginal& mu, const ParticleSet& tilde, const KernelSpec& k, double mass_tol) {
  return mmd2_grad(mu, uniform_table(tilde), k, mass_tol);
}

}  // namespace pwgf
