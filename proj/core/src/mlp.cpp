#include "openmix/mlp.hpp"

#include <cmath>
#include <string>

#include "openmix/error.hpp"

namespace openmix {

namespace {

void check_same_shape(const Gradients& grads, const MlpModel& model, const char* what) {
  if (grads.layers.size() != model.num_layers()) {
    throw DimensionError(std::string(what) + ": layer count mismatch");
  }
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const auto& g = grads.layers[l];
    const auto& p = model.layers()[l];
    if (g.weights.rows() != p.weights.rows() || g.weights.cols() != p.weights.cols() ||
        g.bias.size() != p.bias.size()) {
      throw DimensionError(std::string(what) + ": shape mismatch in layer " + std::to_string(l));
    }
  }
}

}  // namespace

MlpModel::MlpModel(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw DimensionError("an MLP needs at least input and output dims");
  for (std::size_t d : dims_) {
    if (d == 0) throw DimensionError("layer dims must be positive");
  }
  layers_.reserve(dims_.size() - 1);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    layers_.push_back({Matrix(dims_[l], dims_[l + 1]), std::vector<double>(dims_[l + 1], 0.0)});
  }
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DimensionError("an MLP needs at least one layer");
  dims_.push_back(layers_.front().weights.rows());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.rows() != dims_.back()) {
      throw DimensionError("layer " + std::to_string(l) + " fan-in " +
                           std::to_string(layer.weights.rows()) + " does not match " +
                           std::to_string(dims_.back()));
    }
    if (layer.bias.size() != layer.weights.cols()) {
      throw DimensionError("layer " + std::to_string(l) + " bias length mismatch");
    }
    dims_.push_back(layer.weights.cols());
  }
}

MlpModel MlpModel::glorot(std::vector<std::size_t> layer_dims, Rng& rng) {
  MlpModel model(std::move(layer_dims));
  for (auto& layer : model.layers_) {
    const double fan_in = static_cast<double>(layer.weights.rows());
    const double fan_out = static_cast<double>(layer.weights.cols());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
  }
  return model;
}

std::size_t MlpModel::num_parameters() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

Gradients Gradients::zeros_like(const MlpModel& model) {
  Gradients g;
  g.layers.reserve(model.num_layers());
  for (const auto& layer : model.layers()) {
    g.layers.push_back({Matrix(layer.weights.rows(), layer.weights.cols()),
                        std::vector<double>(layer.bias.size(), 0.0)});
  }
  return g;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
  if (other.layers.size() != layers.size()) throw DimensionError("gradient layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto dst = layers[l].weights.data();
    auto src = other.layers[l].weights.data();
    if (dst.size() != src.size() || layers[l].bias.size() != other.layers[l].bias.size()) {
      throw DimensionError("gradient shape mismatch");
    }
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
    for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
      layers[l].bias[i] += scale * other.layers[l].bias[i];
    }
  }
}

ForwardTrace forward_trace(const MlpModel& model, const Matrix& batch) {
  if (batch.cols() != model.input_dim()) {
    throw DimensionError("forward: batch has " + std::to_string(batch.cols()) +
                         " columns, model expects " + std::to_string(model.input_dim()));
  }
  ForwardTrace trace;
  trace.activations.reserve(model.num_layers());
  trace.activations.push_back(batch);
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const auto& layer = model.layers()[l];
    Matrix z = matmul(trace.activations.back(), layer.weights);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      auto r = z.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] += layer.bias[j];
    }
    if (l + 1 == model.num_layers()) {
      trace.logits = std::move(z);
    } else {
      for (double& v : z.data()) v = v > 0.0 ? v : 0.0;
      trace.activations.push_back(std::move(z));
    }
  }
  return trace;
}

ForwardResult forward(const MlpModel& model, const Matrix& batch) {
  ForwardTrace trace = forward_trace(model, batch);
  return {std::move(trace.logits), std::move(trace.activations.back())};
}

Gradients backward(const MlpModel& model, const ForwardTrace& trace, const Matrix& grad_logits) {
  if (grad_logits.rows() != trace.logits.rows() || grad_logits.cols() != trace.logits.cols()) {
    throw DimensionError("backward: grad_logits shape does not match logits");
  }
  Gradients grads = Gradients::zeros_like(model);
  Matrix delta = grad_logits;
  for (std::size_t l = model.num_layers(); l-- > 0;) {
    const Matrix& input = trace.activations[l];
    auto& g = grads.layers[l];
    g.weights = matmul_transpose_a(input, delta);
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      auto r = delta.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) g.bias[j] += r[j];
    }
    if (l == 0) break;
    Matrix upstream = matmul_transpose_b(delta, model.layers()[l].weights);
    // input holds post-ReLU values: zero exactly where the pre-activation was ≤ 0.
    auto up = upstream.data();
    auto act = input.data();
    for (std::size_t i = 0; i < up.size(); ++i) {
      if (act[i] <= 0.0) up[i] = 0.0;
    }
    delta = std::move(upstream);
  }
  return grads;
}

Gradients backward(const MlpModel& model, const Matrix& batch, const Matrix& grad_logits) {
  return backward(model, forward_trace(model, batch), grad_logits);
}

OptimizerState OptimizerState::for_model(const MlpModel& model, double learning_rate,
                                         double momentum, double weight_decay) {
  if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
  return {learning_rate, momentum, weight_decay, Gradients::zeros_like(model)};
}

void sgd_step(MlpModel& model, const Gradients& grads, OptimizerState& opt) {
  check_same_shape(grads, model, "sgd_step");
  if (opt.velocity.layers.empty()) opt.velocity = Gradients::zeros_like(model);
  check_same_shape(opt.velocity, model, "sgd_step velocity");
  auto update = [&](std::span<double> param, std::span<const double> grad, std::span<double> vel) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      vel[i] = opt.momentum * vel[i] + grad[i] + opt.weight_decay * param[i];
      param[i] -= opt.learning_rate * vel[i];
    }
  };
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    auto& layer = model.layers()[l];
    update(layer.weights.data(), grads.layers[l].weights.data(),
           opt.velocity.layers[l].weights.data());
    update(layer.bias, grads.layers[l].bias, opt.velocity.layers[l].bias);
  }
}

}  // namespace openmix
