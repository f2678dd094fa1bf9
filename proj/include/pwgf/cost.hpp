#pragma once

#include <functional>

#include <Eigen/Core>

namespace pwgf {

/// Box from which registration probe points are drawn.
struct ProbeBox {
  double lo = -2.0;
  double hi = 8.0;
  int count = 6;
};

/// Differentiable cost f on the continuous extension of the support. The
/// constructor checks `grad` against central differences of `eval` at
/// pseudo-random points of `probes` and throws InputError on mismatch.
class CostFunction {
 public:
  using Eval = std::function<double(const Eigen::VectorXd&)>;
  using Grad = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  CostFunction(Eigen::Index dim, Eval eval, Grad grad, ProbeBox probes = {});

  double operator()(const Eigen::VectorXd& z) const { return eval_(z); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const { return grad_(z); }
  Eigen::Index dim() const { return dim_; }

 private:
  Eigen::Index dim_;
  Eval eval_;
  Grad grad_;
};

/// f(z) = |z - center|^2.
CostFunction squared_distance_cost(const Eigen::VectorXd& center);
CostFunction squared_distance_cost(double center);

/// f(z) = slope . z + offset.
CostFunction linear_cost(const Eigen::VectorXd& slope, double offset = 0.0);

/// f(z) = value.
CostFunction constant_cost(double value, Eigen::Index dim = 1);

}  // namespace pwgf
