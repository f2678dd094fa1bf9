#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pwgf/errors.hpp"
#include "pwgf/rng.hpp"

namespace pwgf {

template <typename Scalar>
struct DenseLayer {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weight;  // fan_out x fan_in
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bias;
};

/// Scalar-in, scalar-out perceptron: tanh hidden layers and a sigmoid output,
/// so the output lies in (0, 1).
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Layer = DenseLayer<Scalar>;

  /// Zero-initialized network with the given layer widths, e.g. {1, 32, 32, 1}.
  explicit Mlp(std::vector<Eigen::Index> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2 || widths_.front() != 1 || widths_.back() != 1) {
      throw UsageError("Mlp widths must start and end with 1");
    }
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      if (widths_[l + 1] < 1) throw UsageError("Mlp layer widths must be positive");
      layers_.push_back({Matrix::Zero(widths_[l + 1], widths_[l]), Vector::Zero(widths_[l + 1])});
    }
  }

  /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static Mlp glorot(std::vector<Eigen::Index> widths, const RngStream& rng) {
    Mlp net(std::move(widths));
    UniformSource source(rng);
    for (auto& layer : net.layers_) {
      const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
          layer.weight(i, j) = static_cast<Scalar>(source.uniform(-limit, limit));
        }
      }
    }
    return net;
  }

  const std::vector<Eigen::Index>& widths() const { return widths_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  template <typename To>
  Mlp<To> cast() const {
    Mlp<To> out(widths_);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      out.layers()[l].weight = layers_[l].weight.template cast<To>();
      out.layers()[l].bias = layers_[l].bias.template cast<To>();
    }
    return out;
  }

  bool all_finite() const {
    for (const auto& layer : layers_) {
      if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
    }
    return true;
  }

 private:
  std::vector<Eigen::Index> widths_;
  std::vector<Layer> layers_;
};

/// Activations of one forward pass: activations[0] is the input, the last
/// entry the sigmoid output.
template <typename Scalar>
struct MlpCache {
  std::vector<typename Mlp<Scalar>::Vector> activations;
  const Mlp<Scalar>* owner = nullptr;
};

template <typename Scalar>
struct ForwardResult {
  Scalar output;
  MlpCache<Scalar> cache;
};

/// Per-layer parameter gradients, shaped like the network's layers.
template <typename Scalar>
using MlpGradients = std::vector<DenseLayer<Scalar>>;

template <typename Scalar>
struct BackwardResult {
  MlpGradients<Scalar> grads;
  Scalar dz;  // derivative with respect to the input
};

template <typename Scalar>
Scalar stable_sigmoid(Scalar s) {
  using std::exp;
  if (s >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-s));
  const Scalar e = exp(s);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
ForwardResult<Scalar> mlp_forward(const Mlp<Scalar>& net, Scalar z) {
  using std::isfinite;
  using Vector = typename Mlp<Scalar>::Vector;
  if (!isfinite(z)) throw NumericError("non-finite network input");
  ForwardResult<Scalar> result{Scalar(0), {{}, &net}};
  auto& acts = result.cache.activations;
  acts.reserve(net.layers().size() + 1);
  acts.push_back(Vector::Constant(1, z));
  const std::size_t last = net.layers().size() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    const auto& layer = net.layers()[l];
    Vector pre = layer.weight * acts.back() + layer.bias;
    if (!pre.allFinite()) throw NumericError("non-finite pre-activation in layer " + std::to_string(l));
    if (l < last) {
      acts.push_back(pre.array().tanh().matrix());
    } else {
      acts.push_back(Vector::Constant(1, stable_sigmoid(pre(0))));
    }
  }
  result.output = acts.back()(0);
  return result;
}

/// Gradients of upstream * w(z) with respect to every weight and to z.
template <typename Scalar>
BackwardResult<Scalar> mlp_backward(const Mlp<Scalar>& net, const MlpCache<Scalar>& cache, Scalar upstream) {
  using Vector = typename Mlp<Scalar>::Vector;
  const auto& layers = net.layers();
  if (cache.owner != &net || cache.activations.size() != layers.size() + 1) {
    throw UsageError("cache does not come from a forward pass of this network");
  }
  BackwardResult<Scalar> out{MlpGradients<Scalar>(layers.size()), Scalar(0)};
  const Scalar w = cache.activations.back()(0);
  Vector delta = Vector::Constant(1, upstream * w * (Scalar(1) - w));
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Vector& input = cache.activations[l];
    if (input.size() != layers[l].weight.cols()) throw UsageError("cache shape does not match the network");
    out.grads[l].weight = delta * input.transpose();
    out.grads[l].bias = delta;
    Vector back = layers[l].weight.transpose() * delta;
    if (l > 0) {
      delta = back.cwiseProduct((Scalar(1) - input.array().square()).matrix());
    } else {
      out.dz = back(0);
    }
  }
  return out;
}

template <typename Scalar>
MlpGradients<Scalar> zero_gradients(const Mlp<Scalar>& net) {
  MlpGradients<Scalar> g;
  for (const auto& layer : net.layers()) {
    g.push_back({decltype(layer.weight)::Zero(layer.weight.rows(), layer.weight.cols()),
                 decltype(layer.bias)::Zero(layer.bias.size())});
  }
  return g;
}

/// acc += scale * g
template <typename Scalar>
void accumulate(MlpGradients<Scalar>& acc, const MlpGradients<Scalar>& g, Scalar scale) {
  if (acc.size() != g.size()) throw UsageError("gradient shapes differ");
  for (std::size_t l = 0; l < acc.size(); ++l) {
    acc[l].weight += scale * g[l].weight;
    acc[l].bias += scale * g[l].bias;
  }
}

/// Adaptive-moment optimizer state.
template <typename Scalar>
struct AdamState {
  Scalar learning_rate = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
  std::int64_t step = 0;
  MlpGradients<Scalar> first_moment;
  MlpGradients<Scalar> second_moment;

  static AdamState for_net(const Mlp<Scalar>& net, Scalar learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    s.first_moment = zero_gradients(net);
    s.second_moment = zero_gradients(net);
    return s;
  }
};

template <typename Scalar>
void adam_step(Mlp<Scalar>& net, const MlpGradients<Scalar>& grads, AdamState<Scalar>& state) {
  using std::pow;
  using std::sqrt;
  auto& layers = net.layers();
  if (grads.size() != layers.size() || state.first_moment.size() != layers.size()) {
    throw UsageError("optimizer state does not match the network");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads[l].weight.rows() != layers[l].weight.rows() || grads[l].weight.cols() != layers[l].weight.cols() ||
        grads[l].bias.size() != layers[l].bias.size()) {
      throw UsageError("gradient shape does not match layer " + std::to_string(l));
    }
  }
  ++state.step;
  const Scalar c1 = Scalar(1) - pow(state.beta1, static_cast<Scalar>(state.step));
  const Scalar c2 = Scalar(1) - pow(state.beta2, static_cast<Scalar>(state.step));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = state.beta1 * m + (Scalar(1) - state.beta1) * grad;
    v = state.beta2 * v + (Scalar(1) - state.beta2) * grad.cwiseProduct(grad);
    param.array() -= state.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, grads[l].weight, state.first_moment[l].weight, state.second_moment[l].weight);
    update(layers[l].bias, grads[l].bias, state.first_moment[l].bias, state.second_moment[l].bias);
  }
}

}  // namespace pwgf
