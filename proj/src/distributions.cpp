#include "pwgf/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <type_traits>

#include "pwgf/detail/overloaded.hpp"
#include "pwgf/errors.hpp"

namespace pwgf {
namespace {

using detail::overloaded;

bool is_nonnegative_integer(double z) { return z >= 0.0 && std::floor(z) == z && std::isfinite(z); }

double poisson_log_pmf(double rate, double k) { return k * std::log(rate) - rate - std::lgamma(k + 1.0); }

}  // namespace

void validate(const Marginal& m) {
  std::visit(overloaded{
                 [](const Bernoulli& b) {
                   if (!(b.p >= 0.0 && b.p <= 1.0)) {
                     throw DomainError("Bernoulli p must lie in [0,1], got " + std::to_string(b.p));
                   }
                 },
                 [](const Poisson& p) {
                   if (!(p.rate > 0.0) || !std::isfinite(p.rate)) {
                     throw DomainError("Poisson rate must be positive, got " + std::to_string(p.rate));
                   }
                 },
                 [](const Categorical& c) {
                   if (c.atoms.size() < 1 || c.atoms.size() != c.probs.size()) {
                     throw DomainError("Categorical needs matching non-empty atoms and probs");
                   }
                   if (!c.atoms.allFinite()) throw DomainError("Categorical atoms must be finite");
                   if ((c.probs.array() < 0.0).any() || (c.probs.array() > 1.0).any()) {
                     throw DomainError("Categorical probabilities must lie in [0,1]");
                   }
                   if (std::abs(c.probs.sum() - 1.0) > 1e-9) {
                     throw DomainError("Categorical probabilities must sum to 1");
                   }
                 },
             },
             m);
}

DiscreteDistribution::DiscreteDistribution(Bernoulli b) : DiscreteDistribution(Marginal(b)) {}
DiscreteDistribution::DiscreteDistribution(Poisson p) : DiscreteDistribution(Marginal(p)) {}
DiscreteDistribution::DiscreteDistribution(Categorical c) : DiscreteDistribution(Marginal(std::move(c))) {}

DiscreteDistribution::DiscreteDistribution(const Marginal& m) : marginals_{m}, product_(false) { validate(m); }

DiscreteDistribution::DiscreteDistribution(FactorizedProduct product)
    : marginals_(std::move(product.marginals)), product_(true) {
  if (marginals_.empty()) throw DomainError("FactorizedProduct needs at least one marginal");
  for (const auto& m : marginals_) validate(m);
}

Family DiscreteDistribution::family() const {
  if (product_) return Family::FactorizedProduct;
  return std::visit(overloaded{
                        [](const Bernoulli&) { return Family::Bernoulli; },
                        [](const Poisson&) { return Family::Poisson; },
                        [](const Categorical&) { return Family::Categorical; },
                    },
                    marginals_.front());
}

const Marginal& DiscreteDistribution::as_marginal() const {
  if (product_) throw InputError("expected a one-dimensional distribution, got a product");
  return marginals_.front();
}

double sample_one(const Marginal& m, UniformSource& source) {
  return std::visit(overloaded{
                        [&](const Bernoulli& b) { return source.uniform() < b.p ? 1.0 : 0.0; },
                        [&](const Poisson& p) {
                          // Inversion by sequential search.
                          const double u = source.uniform();
                          double term = std::exp(-p.rate);
                          double cdf = term;
                          double k = 0.0;
                          while (u >= cdf) {
                            k += 1.0;
                            term *= p.rate / k;
                            cdf += term;
                            if (term == 0.0 && k > p.rate) break;
                          }
                          return k;
                        },
                        [&](const Categorical& c) {
                          const double u = source.uniform();
                          double cdf = 0.0;
                          Eigen::Index last = 0;
                          for (Eigen::Index j = 0; j < c.probs.size(); ++j) {
                            if (c.probs(j) <= 0.0) continue;
                            last = j;
                            cdf += c.probs(j);
                            if (u < cdf) return c.atoms(j);
                          }
                          return c.atoms(last);
                        },
                    },
                    m);
}

ParticleSet sample(const DiscreteDistribution& dist, Eigen::Index n, const RngStream& rng) {
  if (n < 1) throw InputError("sample count must be >= 1");
  Eigen::MatrixXd out(n, dist.dim());
  for (Eigen::Index i = 0; i < dist.dim(); ++i) {
    UniformSource source(dist.is_product() ? rng.child(static_cast<std::uint64_t>(i)) : rng);
    const Marginal& m = dist.marginal(i);
    for (Eigen::Index s = 0; s < n; ++s) out(s, i) = sample_one(m, source);
  }
  return ParticleSet(std::move(out));
}

double mean(const Marginal& m) {
  return std::visit(overloaded{
                        [](const Bernoulli& b) { return b.p; },
                        [](const Poisson& p) { return p.rate; },
                        [](const Categorical& c) { return c.atoms.dot(c.probs); },
                    },
                    m);
}

double variance(const Marginal& m) {
  return std::visit(overloaded{
                        [](const Bernoulli& b) { return b.p * (1.0 - b.p); },
                        [](const Poisson& p) { return p.rate; },
                        [](const Categorical& c) {
                          const double mu = c.atoms.dot(c.probs);
                          return (c.atoms.array() - mu).square().matrix().dot(c.probs);
                        },
                    },
                    m);
}

Eigen::VectorXd mean(const DiscreteDistribution& dist) {
  Eigen::VectorXd out(dist.dim());
  for (Eigen::Index i = 0; i < dist.dim(); ++i) out(i) = mean(dist.marginal(i));
  return out;
}

double pmf(const Marginal& m, double z) {
  return std::visit(overloaded{
                        [z](const Bernoulli& b) {
                          if (z == 1.0) return b.p;
                          if (z == 0.0) return 1.0 - b.p;
                          return 0.0;
                        },
                        [z](const Poisson& p) {
                          if (!is_nonnegative_integer(z)) return 0.0;
                          return std::exp(poisson_log_pmf(p.rate, z));
                        },
                        [z](const Categorical& c) {
                          double mass = 0.0;
                          for (Eigen::Index j = 0; j < c.atoms.size(); ++j) {
                            if (c.atoms(j) == z) mass += c.probs(j);
                          }
                          return mass;
                        },
                    },
                    m);
}

double pmf(const DiscreteDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != dist.dim()) throw InputError("point dimension does not match distribution");
  double mass = 1.0;
  for (Eigen::Index i = 0; i < dist.dim() && mass > 0.0; ++i) mass *= pmf(dist.marginal(i), z(i));
  return mass;
}

double pmf_derivative(const Marginal& m, double z) {
  return std::visit(overloaded{
                        [z](const Bernoulli&) {
                          if (z == 1.0) return 1.0;
                          if (z == 0.0) return -1.0;
                          return 0.0;
                        },
                        [z](const Poisson& p) {
                          if (!is_nonnegative_integer(z)) return 0.0;
                          return std::exp(poisson_log_pmf(p.rate, z)) * (z / p.rate - 1.0);
                        },
                        [](const Categorical&) -> double {
                          throw UnsupportedError("Categorical has no scalar mean parameter");
                        },
                    },
                    m);
}

double score(const Marginal& m, double z) {
  return std::visit(overloaded{
                        [z](const Bernoulli& b) {
                          if (b.p <= 0.0 || b.p >= 1.0) {
                            throw DomainError("Bernoulli score undefined at p in {0,1}");
                          }
                          if (z == 1.0) return 1.0 / b.p;
                          if (z == 0.0) return -1.0 / (1.0 - b.p);
                          throw DomainError("score evaluated outside the Bernoulli support");
                        },
                        [z](const Poisson& p) {
                          if (!is_nonnegative_integer(z)) {
                            throw DomainError("score evaluated outside the Poisson support");
                          }
                          return z / p.rate - 1.0;
                        },
                        [](const Categorical&) -> double {
                          throw UnsupportedError("Categorical has no scalar mean parameter");
                        },
                    },
                    m);
}

Eigen::VectorXd score(const DiscreteDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != dist.dim()) throw InputError("point dimension does not match distribution");
  Eigen::VectorXd out(dist.dim());
  for (Eigen::Index i = 0; i < dist.dim(); ++i) out(i) = score(dist.marginal(i), z(i));
  return out;
}

SupportTable truncated_support(const Marginal& m, double mass_tol) {
  if (!(mass_tol > 0.0 && mass_tol < 1.0)) throw InputError("mass_tol must lie in (0,1)");
  const double target = 1.0 - mass_tol;
  std::vector<double> atoms;
  std::vector<double> probs;

  std::visit(overloaded{
                 [&](const Bernoulli& b) {
                   atoms.push_back(0.0);
                   probs.push_back(1.0 - b.p);
                   if (1.0 - b.p < target) {
                     atoms.push_back(1.0);
                     probs.push_back(b.p);
                   }
                 },
                 [&](const Poisson& p) {
                   double cumulative = 0.0;
                   for (double k = 0.0;; k += 1.0) {
                     const double mass = std::exp(poisson_log_pmf(p.rate, k));
                     atoms.push_back(k);
                     probs.push_back(mass);
                     cumulative += mass;
                     if (cumulative >= target) break;
                     // Rounding can stall the sum just below an extreme target.
                     if (k > p.rate && mass < 1e-300) break;
                   }
                 },
                 [&](const Categorical& c) {
                   std::vector<Eigen::Index> order(static_cast<std::size_t>(c.atoms.size()));
                   std::iota(order.begin(), order.end(), Eigen::Index{0});
                   std::stable_sort(order.begin(), order.end(),
                                    [&](Eigen::Index a, Eigen::Index b) { return c.atoms(a) < c.atoms(b); });
                   double cumulative = 0.0;
                   for (Eigen::Index j : order) {
                     atoms.push_back(c.atoms(j));
                     probs.push_back(c.probs(j));
                     cumulative += c.probs(j);
                     if (cumulative >= target) break;
                   }
                 },
             },
             m);

  SupportTable table;
  table.atoms = Eigen::Map<const Eigen::VectorXd>(atoms.data(), static_cast<Eigen::Index>(atoms.size()));
  table.probs = Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()));
  return table;
}

SupportTable truncated_support(const DiscreteDistribution& dist, double mass_tol) {
  return truncated_support(dist.as_marginal(), mass_tol);
}

JointSupport enumerate_support(const DiscreteDistribution& dist, double mass_tol, Eigen::Index max_atoms) {
  std::vector<SupportTable> tables;
  tables.reserve(static_cast<std::size_t>(dist.dim()));
  double count = 1.0;
  for (const auto& m : dist.marginals()) {
    tables.push_back(truncated_support(m, mass_tol));
    count *= static_cast<double>(tables.back().size());
    if (count > static_cast<double>(max_atoms)) {
      throw CapacityError("truncated product support exceeds " + std::to_string(max_atoms) + " atoms");
    }
  }

  const auto total = static_cast<Eigen::Index>(count);
  const Eigen::Index d = dist.dim();
  JointSupport joint{Eigen::MatrixXd(total, d), Eigen::VectorXd::Ones(total)};
  // Mixed-radix enumeration, first coordinate fastest.
  for (Eigen::Index row = 0; row < total; ++row) {
    Eigen::Index rest = row;
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto& t = tables[static_cast<std::size_t>(i)];
      const Eigen::Index j = rest % t.size();
      rest /= t.size();
      joint.atoms(row, i) = t.atoms(j);
      joint.probs(row) *= t.probs(j);
    }
  }
  return joint;
}

bool is_mean_parameterized(const Marginal& m) { return !std::holds_alternative<Categorical>(m); }

Eigen::VectorXd parameters(const DiscreteDistribution& dist) {
  Eigen::VectorXd out(dist.dim());
  for (Eigen::Index i = 0; i < dist.dim(); ++i) {
    const Marginal& m = dist.marginal(i);
    if (!is_mean_parameterized(m)) throw UnsupportedError("Categorical has no scalar mean parameter");
    out(i) = mean(m);
  }
  return out;
}

DiscreteDistribution with_parameters(const DiscreteDistribution& dist,
                                     const Eigen::Ref<const Eigen::VectorXd>& params) {
  if (params.size() != dist.dim()) throw InputError("parameter vector has wrong dimension");
  std::vector<Marginal> updated;
  updated.reserve(static_cast<std::size_t>(dist.dim()));
  for (Eigen::Index i = 0; i < dist.dim(); ++i) {
    const double theta = params(i);
    updated.push_back(std::visit(overloaded{
                                     [theta](const Bernoulli&) -> Marginal { return Bernoulli{theta}; },
                                     [theta](const Poisson&) -> Marginal { return Poisson{theta}; },
                                     [](const Categorical&) -> Marginal {
                                       throw UnsupportedError("Categorical has no scalar mean parameter");
                                     },
                                 },
                                 dist.marginal(i)));
  }
  if (dist.is_product()) return DiscreteDistribution(FactorizedProduct{std::move(updated)});
  return DiscreteDistribution(updated.front());
}

}  // namespace pwgf
