#include "pwgf/wasserstein.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "pwgf/errors.hpp"

namespace pwgf {
namespace {

using Index = Eigen::Index;

std::vector<Index> ascending_order(const Eigen::VectorXd& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values(a) < values(b); });
  return order;
}

Eigen::VectorXd sorted(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::VectorXd out = v;
  std::sort(out.data(), out.data() + out.size());
  return out;
}

}  // namespace

FiniteDistribution::FiniteDistribution(Eigen::VectorXd atoms, Eigen::VectorXd probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  if (atoms_.size() < 1 || atoms_.size() != probs_.size()) {
    throw InputError("FiniteDistribution needs matching non-empty atoms and probs");
  }
  if (!atoms_.allFinite() || !probs_.allFinite()) throw InputError("FiniteDistribution values must be finite");
  if ((probs_.array() < 0.0).any()) throw InputError("FiniteDistribution probabilities must be nonnegative");
  if (std::abs(probs_.sum() - 1.0) > 1e-12) throw InputError("FiniteDistribution probabilities must sum to 1");
  const Eigen::VectorXd s = sorted(atoms_);
  for (Index i = 1; i < s.size(); ++i) {
    if (s(i) == s(i - 1)) throw InputError("FiniteDistribution atoms must be distinct");
  }
}

FiniteDistribution FiniteDistribution::empirical(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() < 1) throw InputError("empirical measure of an empty sample");
  const Eigen::VectorXd s = sorted(values);
  std::vector<double> atoms;
  std::vector<double> counts;
  for (Index i = 0; i < s.size(); ++i) {
    if (!atoms.empty() && atoms.back() == s(i)) {
      counts.back() += 1.0;
    } else {
      atoms.push_back(s(i));
      counts.push_back(1.0);
    }
  }
  const auto k = static_cast<Index>(atoms.size());
  Eigen::VectorXd probs = Eigen::Map<Eigen::VectorXd>(counts.data(), k) / static_cast<double>(s.size());
  return FiniteDistribution(Eigen::Map<Eigen::VectorXd>(atoms.data(), k), std::move(probs));
}

FiniteDistribution FiniteDistribution::from_marginal(const Marginal& m, double mass_tol) {
  SupportTable t = truncated_support(m, mass_tol);
  // Categorical atoms may repeat; merge them.
  std::vector<double> atoms;
  std::vector<double> probs;
  for (Index i = 0; i < t.size(); ++i) {
    if (!atoms.empty() && atoms.back() == t.atoms(i)) {
      probs.back() += t.probs(i);
    } else {
      atoms.push_back(t.atoms(i));
      probs.push_back(t.probs(i));
    }
  }
  const auto k = static_cast<Index>(atoms.size());
  Eigen::VectorXd p = Eigen::Map<Eigen::VectorXd>(probs.data(), k);
  p /= p.sum();
  return FiniteDistribution(Eigen::Map<Eigen::VectorXd>(atoms.data(), k), std::move(p));
}

TransportResult w2_lp_oracle(const FiniteDistribution& mu, const FiniteDistribution& nu) {
  if (mu.size() > kMaxOracleAtoms || nu.size() > kMaxOracleAtoms) {
    throw InputError("LP oracle accepts at most " + std::to_string(kMaxOracleAtoms) + " atoms per side");
  }
  if (std::abs(mu.probs().sum() - nu.probs().sum()) > 1e-12) throw InputError("marginal masses differ");

  const auto row_order = ascending_order(mu.atoms());
  const auto col_order = ascending_order(nu.atoms());
  const Index m = mu.size();
  const Index n = nu.size();

  TransportResult result;
  Coupling& c = result.coupling;
  c.row_atoms.resize(m);
  c.col_atoms.resize(n);
  Eigen::VectorXd a(m);
  Eigen::VectorXd b(n);
  for (Index i = 0; i < m; ++i) {
    c.row_atoms(i) = mu.atoms()(row_order[static_cast<std::size_t>(i)]);
    a(i) = mu.probs()(row_order[static_cast<std::size_t>(i)]);
  }
  for (Index j = 0; j < n; ++j) {
    c.col_atoms(j) = nu.atoms()(col_order[static_cast<std::size_t>(j)]);
    b(j) = nu.probs()(col_order[static_cast<std::size_t>(j)]);
  }
  c.mass = Eigen::MatrixXd::Zero(m, n);

  // Monotone coupling: fill the staircase from the smallest atoms upward.
  Index i = 0;
  Index j = 0;
  double ra = a(0);
  double rb = b(0);
  while (i < m && j < n) {
    const double x = std::min(ra, rb);
    c.mass(i, j) += x;
    result.w2 += x * (c.row_atoms(i) - c.col_atoms(j)) * (c.row_atoms(i) - c.col_atoms(j));
    ra -= x;
    rb -= x;
    if (ra <= 0.0 && ++i < m) ra = a(i);
    if (rb <= 0.0 && ++j < n) rb = b(j);
  }
  return result;
}

WeightedPoints product_measure(std::span<const FiniteDistribution> marginals) {
  if (marginals.empty()) throw InputError("product of zero marginals");
  Index count = 1;
  for (const auto& m : marginals) count *= m.size();
  const auto d = static_cast<Index>(marginals.size());
  WeightedPoints out{Eigen::MatrixXd(count, d), Eigen::VectorXd::Ones(count)};
  for (Index row = 0; row < count; ++row) {
    Index rest = row;
    for (Index k = 0; k < d; ++k) {
      const auto& m = marginals[static_cast<std::size_t>(k)];
      const Index j = rest % m.size();
      rest /= m.size();
      out.points(row, k) = m.atoms()(j);
      out.probs(row) *= m.probs()(j);
    }
  }
  return out;
}

TransportSolution w2_joint_lp(const WeightedPoints& mu, const WeightedPoints& nu) {
  if (mu.points.rows() > kMaxOracleAtoms || nu.points.rows() > kMaxOracleAtoms) {
    throw InputError("LP oracle accepts at most " + std::to_string(kMaxOracleAtoms) + " atoms per side");
  }
  if (mu.points.rows() != mu.probs.size() || nu.points.rows() != nu.probs.size()) {
    throw InputError("point and weight counts differ");
  }
  return solve_transport(squared_distance_matrix(mu.points, nu.points), mu.probs, nu.probs);
}

double w2_empirical_1d(const Eigen::Ref<const Eigen::VectorXd>& xs, const Eigen::Ref<const Eigen::VectorXd>& ys) {
  if (xs.size() != ys.size()) throw InputError("empirical W2 needs samples of equal length");
  if (xs.size() < 1) throw InputError("empirical W2 of empty samples");
  return (sorted(xs) - sorted(ys)).squaredNorm() / static_cast<double>(xs.size());
}

double w2_bernoulli(double p, double q) { return std::abs(p - q); }

double w2_bernoulli_vs_empirical(double p, const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("Bernoulli p must lie in [0,1]");
  if (values.size() < 1) throw InputError("empty particle set");
  Eigen::VectorXd desc = sorted(values).reverse();
  const double w = 1.0 / static_cast<double>(desc.size());
  double to_one = p;
  double total = 0.0;
  for (Index k = 0; k < desc.size(); ++k) {
    const double y = desc(k);
    const double take = std::clamp(to_one, 0.0, w);
    total += take * (y - 1.0) * (y - 1.0) + (w - take) * y * y;
    to_one -= take;
  }
  return total;
}

double w2_bernoulli_vs_empirical(double p, const ParticleSet& particles) {
  return w2_bernoulli_vs_empirical(p, particles.values());
}

double w2_factorized(std::span<const std::pair<FiniteDistribution, FiniteDistribution>> marginal_pairs) {
  double total = 0.0;
  for (const auto& [mu, nu] : marginal_pairs) total += w2_lp_oracle(mu, nu).w2;
  return total;
}

double w2_factorized(const DiscreteDistribution& mu, const DiscreteDistribution& nu, double mass_tol) {
  if (mu.dim() != nu.dim()) throw InputError("factorized W2 needs equal dimensions");
  double total = 0.0;
  for (Index i = 0; i < mu.dim(); ++i) {
    const Marginal& a = mu.marginal(i);
    const Marginal& b = nu.marginal(i);
    if (const auto* ba = std::get_if<Bernoulli>(&a)) {
      if (const auto* bb = std::get_if<Bernoulli>(&b)) {
        total += w2_bernoulli(ba->p, bb->p);
        continue;
      }
    }
    total += w2_lp_oracle(FiniteDistribution::from_marginal(a, mass_tol),
                          FiniteDistribution::from_marginal(b, mass_tol))
                 .w2;
  }
  return total;
}

}  // namespace pwgf
