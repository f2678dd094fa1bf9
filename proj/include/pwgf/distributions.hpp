#pragma once

#include <concepts>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "pwgf/particles.hpp"
#include "pwgf/rng.hpp"

namespace pwgf {

/// Default tail mass dropped when enumerating an infinite support.
inline constexpr double kDefaultMassTol = 1e-12;

struct Bernoulli {
  double p;
};

struct Poisson {
  double rate;
};

/// Finite distribution over explicit real atom locations.
struct Categorical {
  Eigen::VectorXd atoms;
  Eigen::VectorXd probs;
};

/// A one-dimensional family member.
using Marginal = std::variant<Bernoulli, Poisson, Categorical>;

struct FactorizedProduct {
  std::vector<Marginal> marginals;
};

enum class Family { Bernoulli, Poisson, Categorical, FactorizedProduct };

/// A parametric discrete distribution: either a single marginal or an
/// independent product of d >= 1 marginals. Construction validates
/// parameters and throws DomainError on violations.
class DiscreteDistribution {
 public:
  DiscreteDistribution(Bernoulli b);
  DiscreteDistribution(Poisson p);
  DiscreteDistribution(Categorical c);
  DiscreteDistribution(FactorizedProduct product);
  explicit DiscreteDistribution(const Marginal& m);

  Family family() const;
  bool is_product() const { return product_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(marginals_.size()); }

  const Marginal& marginal(Eigen::Index i) const { return marginals_.at(static_cast<std::size_t>(i)); }
  std::span<const Marginal> marginals() const { return marginals_; }

  /// The single marginal of a one-dimensional distribution; throws
  /// InputError for products.
  const Marginal& as_marginal() const;

 private:
  std::vector<Marginal> marginals_;
  bool product_ = false;
};

void validate(const Marginal& m);

/// Atoms of a (possibly truncated) one-dimensional support, ascending, with
/// their probabilities. Probabilities sum to at least 1 - mass_tol.
struct SupportTable {
  Eigen::VectorXd atoms;
  Eigen::VectorXd probs;

  Eigen::Index size() const { return atoms.size(); }
};

/// Joint support of a product, one atom per row.
struct JointSupport {
  Eigen::MatrixXd atoms;
  Eigen::VectorXd probs;
};

double sample_one(const Marginal& m, UniformSource& source);

/// n i.i.d. draws. Coordinate i of a product is drawn from rng.child(i) so
/// that it matches the one-dimensional draw of that marginal.
ParticleSet sample(const DiscreteDistribution& dist, Eigen::Index n, const RngStream& rng);

double mean(const Marginal& m);
double variance(const Marginal& m);
Eigen::VectorXd mean(const DiscreteDistribution& dist);

/// Probability mass; zero outside the support.
double pmf(const Marginal& m, double z);
double pmf(const DiscreteDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& z);

/// Derivative of pmf(m, z) with respect to the mean parameter (p or rate).
/// Defined everywhere, including p in {0, 1}.
double pmf_derivative(const Marginal& m, double z);

/// d/dtheta log p_theta(z). Throws DomainError for zero-mass z or a
/// Bernoulli parameter on the boundary, UnsupportedError for Categorical.
double score(const Marginal& m, double z);
Eigen::VectorXd score(const DiscreteDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& z);

/// Smallest ascending prefix of the support holding mass >= 1 - mass_tol.
SupportTable truncated_support(const Marginal& m, double mass_tol = kDefaultMassTol);
SupportTable truncated_support(const DiscreteDistribution& dist, double mass_tol = kDefaultMassTol);

/// Cartesian product of the marginals' truncated supports. Throws
/// CapacityError when it would hold more than max_atoms atoms.
JointSupport enumerate_support(const DiscreteDistribution& dist, double mass_tol = kDefaultMassTol,
                               Eigen::Index max_atoms = 1'000'000);

/// Mean parameter of every coordinate (p or rate). Categorical marginals have
/// no scalar parameter and raise UnsupportedError.
Eigen::VectorXd parameters(const DiscreteDistribution& dist);
DiscreteDistribution with_parameters(const DiscreteDistribution& dist,
                                     const Eigen::Ref<const Eigen::VectorXd>& params);

bool is_mean_parameterized(const Marginal& m);

/// A bare family member (Bernoulli, Poisson or Categorical).
template <typename T>
concept FamilyMember = std::same_as<T, Bernoulli> || std::same_as<T, Poisson> || std::same_as<T, Categorical>;

// Family members convert to both Marginal and DiscreteDistribution; these
// overloads pick the one-dimensional form.
template <FamilyMember F>
double mean(const F& f) {
  return mean(Marginal{f});
}
template <FamilyMember F>
SupportTable truncated_support(const F& f, double mass_tol = kDefaultMassTol) {
  return truncated_support(Marginal{f}, mass_tol);
}

}  // namespace pwgf
