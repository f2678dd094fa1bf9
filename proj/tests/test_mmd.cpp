#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pwgf/errors.hpp"
#include "pwgf/mmd.hpp"
#include "support/oracles.hpp"

namespace pwgf {
namespace {

using testing::central_difference;
using testing::relative_error;

// Direct evaluation of the three MMD terms from their definitions.
double mmd2_reference(const SupportTable& mu, const Eigen::VectorXd& tilde, double h) {
  const auto k = [h](double x, double y) { return std::exp(-(x - y) * (x - y) / (2 * h * h)); };
  double xx = 0, yy = 0, xy = 0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    for (Eigen::Index j = 0; j < mu.size(); ++j) xx += mu.probs(i) * mu.probs(j) * k(mu.atoms(i), mu.atoms(j));
    for (Eigen::Index n = 0; n < tilde.size(); ++n) xy += mu.probs(i) * k(mu.atoms(i), tilde(n));
  }
  for (Eigen::Index n = 0; n < tilde.size(); ++n) {
    for (Eigen::Index m = 0; m < tilde.size(); ++m) yy += k(tilde(n), tilde(m));
  }
  const double N = static_cast<double>(tilde.size());
  return xx + yy / (N * N) - 2.0 * xy / N;
}

TEST(Kernel, Values) {
  const KernelSpec k{0.7};
  EXPECT_EQ(rbf_kernel(1.3, 1.3, k), 1.0);
  EXPECT_NEAR(rbf_kernel(0.0, 0.7 * std::sqrt(2.0), k), std::exp(-1.0), 1e-15);
  EXPECT_EQ(rbf_kernel(0.2, 1.9, k), rbf_kernel(1.9, 0.2, k));
  EXPECT_THROW(KernelSpec{0.0}.validate(), InputError);
  EXPECT_THROW(KernelSpec{-1.0}.validate(), InputError);
}

TEST(Kernel, GramMatchesScalarKernel) {
  const Eigen::Vector3d x(0, 1.5, -2);
  const Eigen::Vector2d y(0.25, 3);
  const KernelSpec k{1.3};
  const Eigen::MatrixXd g = rbf_gram(x, y, k);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(g(i, j), rbf_kernel(x(i), y(j), k), 1e-15);
  }
}

TEST(MedianHeuristic, Examples) {
  EXPECT_EQ(median_heuristic_bandwidth(Eigen::Vector2d(0, 1)), 1.0);
  EXPECT_EQ(median_heuristic_bandwidth(Eigen::Vector3d(0, 0, 0)), 1.0);
  EXPECT_EQ(median_heuristic_bandwidth(Eigen::Vector3d(0, 1, 2)), 1.0);
  EXPECT_EQ(median_heuristic_bandwidth(Eigen::VectorXd::Constant(1, 4.0)), 1.0);
  EXPECT_EQ(median_heuristic_bandwidth(Eigen::Vector3d(0, 3, 9)), 6.0);
}

TEST(MedianHeuristic, MatchesSortedPairwiseGaps) {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 40);
    const int levels = 1 + static_cast<int>(gen() % 6);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = 0.5 * static_cast<double>(gen() % static_cast<unsigned>(levels)) - 1.0;
    std::vector<double> gaps;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) gaps.push_back(std::abs(x(i) - x(j)));
    }
    std::sort(gaps.begin(), gaps.end());
    const std::size_t m = gaps.size();
    double expected = m % 2 == 1 ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
    if (expected == 0.0) expected = 1.0;
    EXPECT_EQ(median_heuristic_bandwidth(x), expected) << "trial " << trial;
  }
}

TEST(Mmd2, Examples) {
  EXPECT_NEAR(mmd2(Bernoulli{1.0}, ParticleSet::from_values({1, 1, 1}), KernelSpec{1.0}), 0.0, 1e-15);
  EXPECT_NEAR(mmd2(Bernoulli{0.0}, ParticleSet::from_values({1}), KernelSpec{1.0}), 2 - 2 * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(mmd2(Bernoulli{0.0}, ParticleSet::from_values({1}), KernelSpec{1.0}), 0.78694, 1e-5);
}

TEST(Mmd2, ZeroOnExactlyMatchingParticles) {
  // Bern(0.25) represented by four particles {0,0,0,1}.
  EXPECT_LE(std::abs(mmd2(Bernoulli{0.25}, ParticleSet::from_values({0, 0, 0, 1}), KernelSpec{0.8})), 1e-12);
  // Pois(3) represented by its own pmf-weighted atoms.
  const Marginal pois = Poisson{3.0};
  const auto support = truncated_support(pois);
  EXPECT_LE(std::abs(mmd2(pois, support, KernelSpec{1.5})), 1e-12);
}

TEST(Mmd2, MatchesDirectEvaluation) {
  UniformSource u(RngStream(3));
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd tilde(7);
    for (int n = 0; n < 7; ++n) tilde(n) = u.uniform(-1, 8);
    const double h = u.uniform(0.3, 3.0);
    const Marginal m = trial % 2 ? Marginal{Bernoulli{u.uniform()}} : Marginal{Poisson{u.uniform(0.5, 6.0)}};
    EXPECT_NEAR(mmd2(m, ParticleSet::from_values(tilde), KernelSpec{h}),
                mmd2_reference(truncated_support(m), tilde, h), 1e-12);
  }
}

TEST(Mmd2, NonnegativeForPmfWeightedClouds) {
  UniformSource u(RngStream(4));
  for (int trial = 0; trial < 100; ++trial) {
    const Marginal mu = Poisson{u.uniform(0.5, 8.0)};
    const auto cloud = truncated_support(Marginal{Poisson{u.uniform(0.5, 8.0)}});
    EXPECT_GE(mmd2(mu, cloud, KernelSpec{u.uniform(0.3, 4.0)}), -1e-12);
  }
}

TEST(Mmd2Grad, BernoulliAtOneHalfDropsFirstTerm) {
  const auto tilde = ParticleSet::from_values({0.3, 1.2, -0.4});
  const KernelSpec k{0.9};
  double sum = 0.0;
  for (double z : {0.3, 1.2, -0.4}) sum += rbf_kernel(1.0, z, k) - rbf_kernel(0.0, z, k);
  EXPECT_NEAR(mmd2_grad(Bernoulli{0.5}, tilde, k), -2.0 / 3.0 * sum, 1e-15);
}

TEST(Mmd2Grad, BernoulliExample) {
  const auto tilde = ParticleSet::from_values({0.8, 0.1});
  const KernelSpec k{1.0};
  const double fd = central_difference([&](double p) { return mmd2(Bernoulli{p}, tilde, k); }, 0.3, 1e-5);
  EXPECT_NEAR(mmd2_grad(Bernoulli{0.3}, tilde, k), fd, 1e-7);
}

TEST(Mmd2Grad, PoissonExample) {
  const auto z = sample(Poisson{5.0}, 20, RngStream(6));
  const Eigen::VectorXd shifted = z.values().array() + 0.37;
  const auto tilde = ParticleSet::from_values(shifted);
  const KernelSpec k{median_heuristic_bandwidth(tilde)};
  const double fd = central_difference([&](double l) { return mmd2(Poisson{l}, tilde, k); }, 5.0, 1e-5);
  EXPECT_NEAR(mmd2_grad(Poisson{5.0}, tilde, k), fd, 1e-6);
}

TEST(Mmd2Grad, MatchesFiniteDifferencesOnRandomCases) {
  UniformSource u(RngStream(10));
  for (int trial = 0; trial < 200; ++trial) {
    const bool bern = trial % 2 == 0;
    const double theta = bern ? u.uniform(0.05, 0.95) : u.uniform(0.5, 9.0);
    Eigen::VectorXd tilde(1 + static_cast<Eigen::Index>(u.bits() % 30));
    for (Eigen::Index n = 0; n < tilde.size(); ++n) tilde(n) = bern ? u.uniform(-0.5, 1.5) : u.uniform(0, 14);
    const auto cloud = ParticleSet::from_values(tilde);
    const KernelSpec k{u.uniform(0.3, 3.0)};
    const auto objective = [&](double t) {
      return bern ? mmd2(Bernoulli{t}, cloud, k) : mmd2(Poisson{t}, cloud, k);
    };
    const double fd = central_difference(objective, theta, 1e-5);
    const double g = bern ? mmd2_grad(Bernoulli{theta}, cloud, k) : mmd2_grad(Poisson{theta}, cloud, k);
    EXPECT_LE(relative_error(g, fd), 1e-4) << "trial " << trial << " g=" << g << " fd=" << fd;
  }
}

TEST(Mmd2Grad, CategoricalUnsupported) {
  const Categorical c{Eigen::Vector2d(0, 1), Eigen::Vector2d(0.5, 0.5)};
  EXPECT_THROW(mmd2_grad(c, ParticleSet::from_values({0.5}), KernelSpec{1.0}), UnsupportedError);
}

TEST(Mmd2Grad, StationaryAtPmfWeightedCloud) {
  const Marginal m = Poisson{4.0};
  EXPECT_LE(std::abs(mmd2_grad(m, truncated_support(m), KernelSpec{1.7})), 1e-12);
  const Marginal b = Bernoulli{0.35};
  EXPECT_LE(std::abs(mmd2_grad(b, truncated_support(b), KernelSpec{0.6})), 1e-12);
}

}  // namespace
}  // namespace pwgf
