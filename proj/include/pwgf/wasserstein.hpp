#pragma once

#include <cmath>
#include <span>
#include <utility>

#include <Eigen/Core>

#include "pwgf/distributions.hpp"
#include "pwgf/particles.hpp"
#include "pwgf/transport.hpp"

namespace pwgf {

/// Largest support accepted by the LP oracles.
inline constexpr Eigen::Index kMaxOracleAtoms = 64;

/// A probability vector over distinct real atoms. Probabilities are
/// nonnegative and sum to 1 within 1e-12.
class FiniteDistribution {
 public:
  FiniteDistribution(Eigen::VectorXd atoms, Eigen::VectorXd probs);

  /// Uniform empirical measure of `values`; repeated values are merged.
  static FiniteDistribution empirical(const Eigen::Ref<const Eigen::VectorXd>& values);
  static FiniteDistribution empirical(const ParticleSet& particles) { return empirical(particles.values()); }

  /// Normalized truncated support of a marginal.
  static FiniteDistribution from_marginal(const Marginal& m, double mass_tol = kDefaultMassTol);

  const Eigen::VectorXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& probs() const { return probs_; }
  Eigen::Index size() const { return atoms_.size(); }
  double mean() const { return atoms_.dot(probs_); }

 private:
  Eigen::VectorXd atoms_;
  Eigen::VectorXd probs_;
};

/// Joint mass a(i, j) between row atoms and column atoms.
struct Coupling {
  Eigen::VectorXd row_atoms;
  Eigen::VectorXd col_atoms;
  Eigen::MatrixXd mass;
};

struct TransportResult {
  double w2 = 0.0;  // squared 2-Wasserstein distance
  Coupling coupling;
};

/// Exact W^2 between finite one-dimensional distributions (at most
/// kMaxOracleAtoms atoms each) with an optimal coupling. In one dimension the
/// monotone north-west-corner coupling of the sorted atoms is optimal for the
/// squared cost.
TransportResult w2_lp_oracle(const FiniteDistribution& mu, const FiniteDistribution& nu);

/// Exact W^2 between point masses in R^d by the transportation simplex.
TransportSolution w2_joint_lp(const WeightedPoints& mu, const WeightedPoints& nu);

/// Product measure of independent one-dimensional marginals.
WeightedPoints product_measure(std::span<const FiniteDistribution> marginals);

/// Quantile coupling of two equal-size samples: mean squared gap between
/// order statistics. Inputs need not be pre-sorted.
double w2_empirical_1d(const Eigen::Ref<const Eigen::VectorXd>& xs, const Eigen::Ref<const Eigen::VectorXd>& ys);

/// W^2(Bern(p), Bern(q)) = |p - q|.
double w2_bernoulli(double p, double q);

/// W^2 between Bern(p) and the empirical measure of one-dimensional
/// particles. The top p-fraction of the mass is sent to 1 and the rest to 0;
/// the particle straddling the threshold is split fractionally.
double w2_bernoulli_vs_empirical(double p, const Eigen::Ref<const Eigen::VectorXd>& values);
double w2_bernoulli_vs_empirical(double p, const ParticleSet& particles);

/// Sum of per-coordinate W^2; equals the joint W^2 of the product measures.
double w2_factorized(std::span<const std::pair<FiniteDistribution, FiniteDistribution>> marginal_pairs);

/// Coordinatewise W^2 between two factorized distributions of equal
/// dimension. Bernoulli pairs use the closed form; other pairs are
/// enumerated on their truncated supports.
double w2_factorized(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                     double mass_tol = kDefaultMassTol);

inline double expectation_of(const Marginal& m) { return mean(m); }
inline double expectation_of(const FiniteDistribution& d) { return d.mean(); }
inline double expectation_of(const ParticleSet& s) { return s.values().mean(); }

/// |E_mu - E_nu|, a lower bound on W(mu, nu).
template <class Mu, class Nu>
double expectation_gap(const Mu& mu, const Nu& nu) {
  return std::abs(expectation_of(mu) - expectation_of(nu));
}

}  // namespace pwgf
