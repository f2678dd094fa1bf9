#include "pwgf/particles.hpp"

#include <utility>

#include "pwgf/errors.hpp"

namespace pwgf {

ParticleSet::ParticleSet(Eigen::MatrixXd samples) : samples_(std::move(samples)) {
  if (samples_.rows() < 1 || samples_.cols() < 1) {
    throw InputError("ParticleSet needs at least one particle of dimension >= 1");
  }
}

ParticleSet ParticleSet::from_values(const Eigen::Ref<const Eigen::VectorXd>& values) {
  return ParticleSet(Eigen::MatrixXd(values));
}

ParticleSet ParticleSet::from_values(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return from_values(v);
}

Eigen::MatrixXd::ConstColXpr ParticleSet::values() const {
  if (dim() != 1) throw InputError("expected one-dimensional particles");
  return samples_.col(0);
}

}  // namespace pwgf
