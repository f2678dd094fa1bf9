#pragma once

#include <initializer_list>

#include <Eigen/Core>

namespace pwgf {

/// N equally weighted real-valued samples of common dimension d, stored one
/// particle per row. Values need not be integers: particles moved by a flow
/// step leave the lattice of the discrete support.
class ParticleSet {
 public:
  explicit ParticleSet(Eigen::MatrixXd samples);

  /// One-dimensional particle set from a list of values.
  static ParticleSet from_values(const Eigen::Ref<const Eigen::VectorXd>& values);
  static ParticleSet from_values(std::initializer_list<double> values);

  Eigen::Index size() const { return samples_.rows(); }
  Eigen::Index dim() const { return samples_.cols(); }

  const Eigen::MatrixXd& samples() const { return samples_; }
  auto particle(Eigen::Index n) const { return samples_.row(n); }
  auto coordinate(Eigen::Index i) const { return samples_.col(i); }

  /// Values of a one-dimensional set. Throws InputError when dim() != 1.
  Eigen::MatrixXd::ConstColXpr values() const;

  Eigen::VectorXd mean() const { return samples_.colwise().mean().transpose(); }

 private:
  Eigen::MatrixXd samples_;
};

}  // namespace pwgf
