#include "pwgf/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "pwgf/errors.hpp"

namespace pwgf {
namespace {

using Index = Eigen::Index;

struct Cell {
  Index row;
  Index col;
};

// Basis of the transportation simplex: a spanning tree over m row nodes and
// n column nodes (column j is node m + j).
class BasisTree {
 public:
  BasisTree(Index m, Index n) : m_(m), n_(n) {}

  std::vector<Cell>& cells() { return cells_; }

  // Potentials with u(0) = 0 and u(i) + v(j) = c(i, j) on basic cells.
  void potentials(const Eigen::Ref<const Eigen::MatrixXd>& cost, Eigen::VectorXd& u, Eigen::VectorXd& v) const {
    const auto adj = adjacency();
    std::vector<char> seen(static_cast<std::size_t>(m_ + n_), 0);
    u.setZero(m_);
    v.setZero(n_);
    std::queue<Index> frontier;
    frontier.push(0);
    seen[0] = 1;
    while (!frontier.empty()) {
      const Index node = frontier.front();
      frontier.pop();
      for (std::size_t k : adj[static_cast<std::size_t>(node)]) {
        const Cell& c = cells_[k];
        const Index other = node < m_ ? m_ + c.col : c.row;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = 1;
        if (node < m_) {
          v(c.col) = cost(c.row, c.col) - u(c.row);
        } else {
          u(c.row) = cost(c.row, c.col) - v(c.col);
        }
        frontier.push(other);
      }
    }
  }

  // Basic cells on the tree path from row node `row` to column node `col`,
  // ordered from the row end.
  std::vector<std::size_t> path(Index row, Index col) const {
    const auto adj = adjacency();
    const auto nodes = static_cast<std::size_t>(m_ + n_);
    std::vector<std::ptrdiff_t> via(nodes, -1);
    std::vector<char> seen(nodes, 0);
    std::queue<Index> frontier;
    frontier.push(row);
    seen[static_cast<std::size_t>(row)] = 1;
    const Index target = m_ + col;
    while (!frontier.empty() && !seen[static_cast<std::size_t>(target)]) {
      const Index node = frontier.front();
      frontier.pop();
      for (std::size_t k : adj[static_cast<std::size_t>(node)]) {
        const Cell& c = cells_[k];
        const Index other = node < m_ ? m_ + c.col : c.row;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = 1;
        via[static_cast<std::size_t>(other)] = static_cast<std::ptrdiff_t>(k);
        frontier.push(other);
      }
    }
    std::vector<std::size_t> out;
    for (Index node = target; node != row;) {
      const auto k = static_cast<std::size_t>(via[static_cast<std::size_t>(node)]);
      out.push_back(k);
      const Cell& c = cells_[k];
      node = node < m_ ? m_ + c.col : c.row;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(static_cast<std::size_t>(m_ + n_));
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      adj[static_cast<std::size_t>(cells_[k].row)].push_back(k);
      adj[static_cast<std::size_t>(m_ + cells_[k].col)].push_back(k);
    }
    return adj;
  }

  Index m_;
  Index n_;
  std::vector<Cell> cells_;
};

}  // namespace

TransportSolution solve_transport(const Eigen::Ref<const Eigen::MatrixXd>& cost,
                                  const Eigen::Ref<const Eigen::VectorXd>& supply,
                                  const Eigen::Ref<const Eigen::VectorXd>& demand) {
  const Index m = supply.size();
  const Index n = demand.size();
  if (m < 1 || n < 1 || cost.rows() != m || cost.cols() != n) {
    throw InputError("transport problem dimensions do not match");
  }
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any()) {
    throw InputError("transport marginals must be nonnegative");
  }
  const double total = supply.sum();
  if (std::abs(total - demand.sum()) > 1e-12 * std::max(1.0, total)) {
    throw InputError("transport marginals carry different total mass");
  }

  Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(m, n);
  BasisTree basis(m, n);

  // North-west corner start: a staircase of exactly m + n - 1 basic cells.
  {
    Eigen::VectorXd a = supply;
    Eigen::VectorXd b = demand;
    Index i = 0;
    Index j = 0;
    for (;;) {
      const double x = std::min(a(i), b(j));
      plan(i, j) = x;
      basis.cells().push_back({i, j});
      a(i) -= x;
      b(j) -= x;
      if (i == m - 1 && j == n - 1) break;
      if ((a(i) <= b(j) && i < m - 1) || j == n - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  const int max_pivots = 50 * static_cast<int>((m + n) * (m + n)) + 1000;
  int degenerate_run = 0;

  Eigen::VectorXd u;
  Eigen::VectorXd v;
  int pivots = 0;
  for (;; ++pivots) {
    if (pivots > max_pivots) throw NumericError("transportation simplex failed to converge");
    basis.potentials(cost, u, v);

    // Dantzig pricing; fall back to first-improving after a run of
    // degenerate pivots to break stalling.
    const bool bland = degenerate_run > static_cast<int>(m + n);
    Index enter_row = -1;
    Index enter_col = -1;
    double best = -tol;
    for (Index i = 0; i < m && !(bland && enter_row >= 0); ++i) {
      for (Index j = 0; j < n; ++j) {
        const double reduced = cost(i, j) - u(i) - v(j);
        if (reduced < best) {
          best = reduced;
          enter_row = i;
          enter_col = j;
          if (bland) break;
        }
      }
    }
    if (enter_row < 0) break;

    const auto cycle = basis.path(enter_row, enter_col);
    // The path has odd length; cells at even positions lose flow.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = 0;
    for (std::size_t k = 0; k < cycle.size(); k += 2) {
      const Cell& c = basis.cells()[cycle[k]];
      if (plan(c.row, c.col) < theta) {
        theta = plan(c.row, c.col);
        leaving = cycle[k];
      }
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      const Cell& c = basis.cells()[cycle[k]];
      plan(c.row, c.col) += (k % 2 == 0) ? -theta : theta;
    }
    plan(enter_row, enter_col) += theta;
    const Cell& out = basis.cells()[leaving];
    plan(out.row, out.col) = 0.0;
    basis.cells()[leaving] = {enter_row, enter_col};
    degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
  }

  plan = plan.cwiseMax(0.0);
  TransportSolution sol;
  sol.cost = plan.cwiseProduct(cost).sum();
  sol.plan = std::move(plan);
  sol.row_potential = std::move(u);
  sol.col_potential = std::move(v);
  sol.pivots = pivots;
  return sol;
}

Eigen::MatrixXd squared_distance_matrix(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                        const Eigen::Ref<const Eigen::MatrixXd>& y) {
  if (x.cols() != y.cols()) throw InputError("point sets have different dimensions");
  Eigen::MatrixXd d(x.rows(), y.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < y.rows(); ++j) d(i, j) = (x.row(i) - y.row(j)).squaredNorm();
  }
  return d;
}

}  // namespace pwgf
