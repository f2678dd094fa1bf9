#pragma once

#include <Eigen/Core>

namespace pwgf {

/// Optimal solution of a balanced transportation problem together with the
/// dual potentials that certify it: row_potential(i) + col_potential(j) <=
/// cost(i, j) everywhere, with equality on the support of the plan, and
/// row_potential . supply + col_potential . demand == cost.
struct TransportSolution {
  double cost = 0.0;
  Eigen::MatrixXd plan;
  Eigen::VectorXd row_potential;
  Eigen::VectorXd col_potential;
  int pivots = 0;
};

/// Exact transportation simplex (north-west corner start, MODI pricing).
/// Supplies and demands must be nonnegative with equal totals (within 1e-12
/// relative); throws InputError otherwise.
TransportSolution solve_transport(const Eigen::Ref<const Eigen::MatrixXd>& cost,
                                  const Eigen::Ref<const Eigen::VectorXd>& supply,
                                  const Eigen::Ref<const Eigen::VectorXd>& demand);

/// Weighted point masses in R^d, one point per row.
struct WeightedPoints {
  Eigen::MatrixXd points;
  Eigen::VectorXd probs;
};

Eigen::MatrixXd squared_distance_matrix(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                        const Eigen::Ref<const Eigen::MatrixXd>& y);

}  // namespace pwgf
