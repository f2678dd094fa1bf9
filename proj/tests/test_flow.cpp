#include <cmath>

#include <gtest/gtest.h>

#include "pwgf/cost.hpp"
#include "pwgf/errors.hpp"
#include "pwgf/estimators.hpp"
#include "pwgf/flow.hpp"
#include "pwgf/wasserstein.hpp"
#include "support/oracles.hpp"

namespace pwgf {
namespace {

double param(const DiscreteDistribution& d) { return parameters(d)(0); }

CostFunction half_square() {
  return CostFunction(
      1, [](const Eigen::VectorXd& z) { return 0.5 * z.squaredNorm(); }, [](const Eigen::VectorXd& z) { return z; });
}

TEST(Cost, RegistrationRejectsInconsistentGradient) {
  EXPECT_THROW(CostFunction(
                   1, [](const Eigen::VectorXd& z) { return z(0) * z(0); },
                   [](const Eigen::VectorXd& z) { return Eigen::VectorXd::Constant(1, 3.0 * z(0)); }),
               InputError);
  EXPECT_NO_THROW(squared_distance_cost(Eigen::Vector2d(1, -1)));
}

TEST(Cost, Factories) {
  const auto sq = squared_distance_cost(5.0);
  EXPECT_EQ(sq(Eigen::VectorXd::Constant(1, 2.0)), 9.0);
  EXPECT_EQ(sq.gradient(Eigen::VectorXd::Constant(1, 2.0))(0), -6.0);
  const auto lin = linear_cost(Eigen::Vector2d(2, -1), 0.5);
  EXPECT_EQ(lin(Eigen::Vector2d(1, 1)), 1.5);
  EXPECT_EQ(lin.gradient(Eigen::Vector2d(7, 3)), Eigen::Vector2d(2, -1));
  const auto c = constant_cost(4.0, 3);
  EXPECT_EQ(c.dim(), 3);
  EXPECT_EQ(c.gradient(Eigen::Vector3d(1, 2, 3)), Eigen::Vector3d::Zero());
}

TEST(WgfStep, Examples) {
  const auto moved = wgf_step(ParticleSet::from_values({2.0}), linear_cost(Eigen::VectorXd::Constant(1, 3.0)), 0.1);
  EXPECT_NEAR(moved.values()(0), 1.7, 1e-15);

  const auto fixed = ParticleSet::from_values({0.0, 3.0, -1.5});
  EXPECT_EQ(wgf_step(fixed, constant_cost(2.0), 0.3).samples(), fixed.samples());

  const auto f = half_square();
  const auto before = ParticleSet::from_values({1.0, -1.0});
  const auto after = wgf_step(before, f, 0.5);
  EXPECT_EQ(after.values(), Eigen::Vector2d(0.5, -0.5));
  const auto empirical = [&](const ParticleSet& s) {
    return 0.5 * (f(s.particle(0).transpose()) + f(s.particle(1).transpose()));
  };
  EXPECT_DOUBLE_EQ(empirical(before), 0.5);
  EXPECT_DOUBLE_EQ(empirical(after), 0.125);
}

TEST(WgfStep, ReportsFirstNonFiniteParticle) {
  const CostFunction blowup(
      1, [](const Eigen::VectorXd& z) { return z(0); },
      [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, z(0) > 100 ? std::numeric_limits<double>::infinity() : 1.0);
      });
  try {
    wgf_step(ParticleSet::from_values({0.0, 1.0, 200.0, 300.0}), blowup, 0.1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.index(), 2);
  }
  EXPECT_THROW(wgf_step(ParticleSet::from_values({1.0}), half_square(), 0.0), InputError);
}

TEST(WgfStep, HalfStepsComposeForLinearCost) {
  const auto lin = linear_cost(Eigen::Vector2d(0.75, -2.0));
  const ParticleSet s(Eigen::MatrixXd::Random(10, 2));
  const auto twice = wgf_step(wgf_step(s, lin, 0.125), lin, 0.125);
  EXPECT_TRUE(twice.samples().isApprox(wgf_step(s, lin, 0.25).samples(), 1e-15));
}

TEST(ExpectationMatch, Examples) {
  EXPECT_DOUBLE_EQ(param(project_expectation_match(Bernoulli{0.5}, ParticleSet::from_values({0, 1, 1, 1}))), 0.75);
  EXPECT_DOUBLE_EQ(param(project_expectation_match(Poisson{1.0}, ParticleSet::from_values({4.2, 5.8}))), 5.0);
  EXPECT_DOUBLE_EQ(param(project_expectation_match(Bernoulli{0.5}, ParticleSet::from_values({-0.2, -0.1}))),
                   kParameterFloor);
  EXPECT_DOUBLE_EQ(param(project_expectation_match(Bernoulli{0.5}, ParticleSet::from_values({1.2, 1.1}))),
                   1.0 - kParameterFloor);
  EXPECT_DOUBLE_EQ(param(project_expectation_match(Poisson{1.0}, ParticleSet::from_values({-3.0}))), kParameterFloor);
}

TEST(ExpectationMatch, PerCoordinateForProducts) {
  Eigen::MatrixXd cloud(2, 2);
  cloud << 0.0, 3.0, 1.0, 5.0;
  const auto out = project_expectation_match(FactorizedProduct{{Bernoulli{0.1}, Poisson{1.0}}}, ParticleSet(cloud));
  EXPECT_EQ(parameters(out), Eigen::Vector2d(0.5, 4.0));
}

TEST(ExpectationMatch, CoincidesWithExactProjectionOnBinaryClouds) {
  UniformSource u(RngStream(15));
  for (int trial = 0; trial < 100; ++trial) {
    const auto cloud = sample(Bernoulli{u.uniform(0.05, 0.95)}, 1 + static_cast<Eigen::Index>(u.bits() % 20),
                              RngStream(static_cast<std::uint64_t>(trial)));
    if (cloud.values().minCoeff() == cloud.values().maxCoeff()) continue;  // clamp applies only to constant clouds
    EXPECT_DOUBLE_EQ(param(project_expectation_match(Bernoulli{0.5}, cloud)), param(project_bernoulli_exact(cloud)));
  }
}

TEST(ExactProjection, Examples) {
  EXPECT_DOUBLE_EQ(param(project_bernoulli_exact(ParticleSet::from_values({0.9, 0.8, -0.1}))), 2.0 / 3.0);
  const auto binary = ParticleSet::from_values({0, 0, 1});
  EXPECT_DOUBLE_EQ(param(project_bernoulli_exact(binary)), 1.0 / 3.0);
  EXPECT_EQ(w2_bernoulli_vs_empirical(1.0 / 3.0, binary), 0.0);
  EXPECT_EQ(param(project_bernoulli_exact(ParticleSet::from_values({0.6, 2.0, 0.51}))), 1.0);
  EXPECT_EQ(param(project_bernoulli_exact(ParticleSet::from_values({0.5}))), 0.0);
}

TEST(ExactProjection, MinimizesOverFineGrid) {
  UniformSource u(RngStream(27));
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd v(1 + static_cast<Eigen::Index>(u.bits() % 12));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u.uniform(-1.0, 2.0);
    const double p = param(project_bernoulli_exact(ParticleSet::from_values(v)));
    const double best = w2_bernoulli_vs_empirical(p, v);
    for (int g = 0; g <= 1000; ++g) EXPECT_LE(best, w2_bernoulli_vs_empirical(g / 1000.0, v) + 1e-12);
  }
}

TEST(ExactProjection, ProductCloudsGiveProducts) {
  Eigen::MatrixXd cloud(2, 3);
  cloud << 0.9, 0.1, 0.7, 0.2, 0.3, 0.8;
  const auto out = project_bernoulli_exact(ParticleSet(cloud));
  EXPECT_TRUE(out.is_product());
  EXPECT_EQ(parameters(out), Eigen::Vector3d(0.5, 0.0, 1.0));
}

TEST(MmdProjection, StationaryAtOwnDistribution) {
  // Pmf-weighted cloud for Bern(0.25): exact particle representation.
  FlowConfig cfg;
  cfg.projection = Projection::MmdGradient;
  const auto out = project_mmd(Bernoulli{0.25}, ParticleSet::from_values({0, 0, 0, 1}), KernelSpec{0.7}, cfg);
  EXPECT_LT(std::abs(param(out) - 0.25), 1e-6);
}

TEST(MmdProjection, MovesTowardCloud) {
  FlowConfig cfg;
  cfg.projection = Projection::MmdGradient;
  cfg.inner_steps = 50;
  const auto cloud = ParticleSet::from_values({1, 1, 1, 1});
  const auto out = project_mmd(Bernoulli{0.5}, cloud, KernelSpec{1.0}, cfg);
  EXPECT_GT(param(out), 0.9);
  EXPECT_LT(mmd2(out.as_marginal(), cloud, KernelSpec{1.0}), mmd2(Bernoulli{0.5}, cloud, KernelSpec{1.0}));

  const auto z = sample(Poisson{5.0}, 200, RngStream(3));
  const Eigen::VectorXd shifted = z.values().array() + 1.0;
  cfg.inner_steps = 10;
  cfg.inner_lr = 5.0;
  EXPECT_GT(param(project_mmd(Poisson{5.0}, ParticleSet::from_values(shifted), std::nullopt, cfg)), 5.0);
}

TEST(FlowConfig, Validation) {
  FlowConfig cfg;
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = FlowConfig{};
  cfg.projection = Projection::MmdGradient;
  cfg.inner_steps = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = FlowConfig{};
  cfg.n_particles = 0;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(DescentLoop, BernoulliReachesOptimum) {
  FlowConfig cfg;
  cfg.epsilon = 0.1;
  cfg.n_particles = 64;
  const auto traj = pwgf_descent_loop(Bernoulli{0.5}, squared_distance_cost(1.0), cfg, 200, RngStream(1));
  ASSERT_FALSE(traj.aborted());
  ASSERT_EQ(traj.records.size(), 201u);
  EXPECT_EQ(traj.records.front().params(0), 0.5);
  EXPECT_LT(traj.records.back().objective, 0.01);
  for (std::size_t k = 1; k < traj.records.size(); ++k) {
    EXPECT_EQ(traj.records[k].iteration, traj.records[k - 1].iteration + 1);
  }
}

// Expectation matching moves lambda to mean(z - 2 eps (z - 5)), whose fixed
// point is 5: the straight-through update sees only E[grad f], which is
// 2 (lambda - 5), and misses the variance term of E[(z - 5)^2] = lambda +
// (lambda - 5)^2. The exact optimum 4.5 is reached by exact descent.
TEST(DescentLoop, PoissonExpectationMatchSettlesAtStraightThroughFixedPoint) {
  FlowConfig cfg;
  cfg.epsilon = 0.1;
  cfg.n_particles = 64;
  const auto traj = pwgf_descent_loop(Poisson{2.0}, squared_distance_cost(5.0), cfg, 300, RngStream(2));
  ASSERT_FALSE(traj.aborted());
  double tail = 0.0;
  for (std::size_t k = 201; k <= 300; ++k) tail += traj.records[k].params(0) / 100.0;
  EXPECT_LT(std::abs(tail - 5.0), 0.1);
}

TEST(DescentLoop, ExactGradientFindsMomentOptimum) {
  const auto cost = squared_distance_cost(5.0);
  double lambda = 2.0;
  for (int k = 0; k < 200; ++k) lambda -= 0.1 * exact_gradient_oracle(Poisson{lambda}, cost).grad(0);
  EXPECT_LT(std::abs(lambda - 4.5), 1e-6);
}

TEST(DescentLoop, ConstantCostLeavesBinaryCloudProjectionFixed) {
  FlowConfig cfg;
  cfg.projection = Projection::ExactBernoulli;
  cfg.n_particles = 4000;
  const auto traj = pwgf_descent_loop(Bernoulli{0.3}, constant_cost(1.0), cfg, 5, RngStream(3));
  for (const auto& r : traj.records) EXPECT_NEAR(r.params(0), 0.3, 0.03);
  for (const auto& r : traj.records) EXPECT_EQ(r.objective, 1.0);
}

TEST(DescentLoop, AbortsWithPartialTrajectory) {
  const CostFunction explode(
      1, [](const Eigen::VectorXd& z) { return -10.0 * z(0); },
      [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, z(0) > 50 ? std::numeric_limits<double>::quiet_NaN() : -10.0);
      });
  FlowConfig cfg;
  cfg.epsilon = 1.0;
  const auto traj = pwgf_descent_loop(Poisson{1.0}, explode, cfg, 100, RngStream(4));
  EXPECT_TRUE(traj.aborted());
  EXPECT_GE(traj.records.size(), 1u);
  EXPECT_LT(traj.records.size(), 101u);
}

TEST(DescentLoop, Deterministic) {
  FlowConfig cfg;
  cfg.projection = Projection::MmdGradient;
  const auto a = pwgf_descent_loop(Poisson{3.0}, squared_distance_cost(6.0), cfg, 20, RngStream(8));
  const auto b = pwgf_descent_loop(Poisson{3.0}, squared_distance_cost(6.0), cfg, 20, RngStream(8));
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].params, b.records[k].params);
    EXPECT_EQ(a.records[k].objective, b.records[k].objective);
  }
}

TEST(ObjectiveValue, ExactForSmallSupports) {
  const double exact = objective_value(Poisson{3.0}, squared_distance_cost(5.0), 1e-14, RngStream(1));
  EXPECT_NEAR(exact, 3.0 + 4.0, 1e-10);
  const DiscreteDistribution wide = FactorizedProduct{{Poisson{3.0}, Poisson{3.0}, Poisson{3.0}}};
  const double mc = objective_value(wide, squared_distance_cost(Eigen::Vector3d::Zero()), 1e-12, RngStream(2),
                                    20000, 1000);
  EXPECT_NEAR(mc, 3 * 12.0, 0.5);
}

}  // namespace
}  // namespace pwgf
