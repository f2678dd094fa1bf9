#include "pwgf/cost.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "pwgf/errors.hpp"
#include "pwgf/rng.hpp"

namespace pwgf {

CostFunction::CostFunction(Eigen::Index dim, Eval eval, Grad grad, ProbeBox probes)
    : dim_(dim), eval_(std::move(eval)), grad_(std::move(grad)) {
  if (dim_ < 1) throw InputError("cost dimension must be >= 1");
  if (!eval_ || !grad_) throw InputError("cost needs both eval and grad");

  UniformSource source(RngStream(0x9d2c5680u, static_cast<std::uint64_t>(dim_)));
  for (int probe = 0; probe < probes.count; ++probe) {
    Eigen::VectorXd z(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) z(i) = source.uniform(probes.lo, probes.hi);
    const Eigen::VectorXd g = grad_(z);
    if (g.size() != dim_ || !g.allFinite()) throw InputError("cost gradient has wrong size or is not finite");
    for (Eigen::Index i = 0; i < dim_; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(z(i)));
      Eigen::VectorXd up = z;
      Eigen::VectorXd down = z;
      up(i) += h;
      down(i) -= h;
      const double fd = (eval_(up) - eval_(down)) / (up(i) - down(i));
      if (std::abs(fd - g(i)) > 1e-5 * std::max({1.0, std::abs(fd), std::abs(g(i))})) {
        throw InputError("cost gradient disagrees with finite differences at coordinate " + std::to_string(i) +
                         ": analytic " + std::to_string(g(i)) + " vs numeric " + std::to_string(fd));
      }
    }
  }
}

CostFunction squared_distance_cost(const Eigen::VectorXd& center) {
  return CostFunction(
      center.size(), [center](const Eigen::VectorXd& z) { return (z - center).squaredNorm(); },
      [center](const Eigen::VectorXd& z) -> Eigen::VectorXd { return 2.0 * (z - center); });
}

CostFunction squared_distance_cost(double center) { return squared_distance_cost(Eigen::VectorXd::Constant(1, center)); }

CostFunction linear_cost(const Eigen::VectorXd& slope, double offset) {
  return CostFunction(
      slope.size(), [slope, offset](const Eigen::VectorXd& z) { return slope.dot(z) + offset; },
      [slope](const Eigen::VectorXd&) -> Eigen::VectorXd { return slope; });
}

CostFunction constant_cost(double value, Eigen::Index dim) {
  return CostFunction(
      dim, [value](const Eigen::VectorXd&) { return value; },
      [dim](const Eigen::VectorXd&) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(dim); });
}

}  // namespace pwgf
