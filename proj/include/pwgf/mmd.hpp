#pragma once

#include <cmath>

#include <Eigen/Core>

#include "pwgf/distributions.hpp"
#include "pwgf/particles.hpp"
#include "pwgf/wasserstein.hpp"

namespace pwgf {

/// Radial basis function kernel exp(-(x - y)^2 / (2 h^2)).
struct KernelSpec {
  double bandwidth = 1.0;

  void validate() const;
};

template <typename Scalar>
Scalar rbf_kernel(Scalar x, Scalar y, const KernelSpec& k) {
  using std::exp;
  const Scalar h = static_cast<Scalar>(k.bandwidth);
  const Scalar d = x - y;
  return exp(-(d * d) / (Scalar(2) * h * h));
}

/// Gram matrix K(x_i, y_j).
template <typename DerivedX, typename DerivedY>
auto rbf_gram(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y, const KernelSpec& k) {
  using Scalar = typename DerivedX::Scalar;
  const Scalar inv = Scalar(-1) / (Scalar(2) * static_cast<Scalar>(k.bandwidth * k.bandwidth));
  return ((x.derived().rowwise().replicate(y.size()).rowwise() - y.derived().transpose()).array().square() * inv)
      .exp()
      .matrix()
      .eval();
}

/// Median of the pairwise distances |x_i - x_j| over distinct pairs. Returns
/// 1.0 when the median is zero or fewer than two particles are given.
double median_heuristic_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& values);
double median_heuristic_bandwidth(const ParticleSet& particles);

/// Squared MMD between a parametric one-dimensional distribution and an
/// empirical cloud. Expectations under `mu` are exact sums over its truncated
/// support; the cloud side is the uniform empirical average.
double mmd2(const Marginal& mu, const ParticleSet& tilde, const KernelSpec& k, double mass_tol = kDefaultMassTol);

/// Same with an explicitly weighted cloud.
double mmd2(const Marginal& mu, const SupportTable& tilde, const KernelSpec& k, double mass_tol = kDefaultMassTol);

/// d mmd2 / d theta for Bernoulli (theta = p) and Poisson (theta = rate).
/// Throws UnsupportedError for Categorical.
double mmd2_grad(const Marginal& mu, const ParticleSet& tilde, const KernelSpec& k,
                 double mass_tol = kDefaultMassTol);
double mmd2_grad(const Marginal& mu, const SupportTable& tilde, const KernelSpec& k,
                 double mass_tol = kDefaultMassTol);

}  // namespace pwgf
