#pragma once

#include <cstddef>
#include <vector>

#include "openmix/matrix.hpp"
#include "openmix/rng.hpp"

namespace openmix {

/// One affine layer: y = x · weights + bias, weights stored (fan_in × fan_out).
struct DenseLayer {
  Matrix weights;
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

/// Multilayer perceptron with ReLU on hidden layers and identity on the output.
/// `layer_dims` = [d, h1, …, hm, k_out]; the penultimate activation is the
/// feature tap z(·).
class MlpModel {
 public:
  MlpModel() = default;
  /// Zero-initialized model.
  explicit MlpModel(std::vector<std::size_t> layer_dims);
  /// Builds from explicit layers; throws DimensionError when shapes disagree.
  explicit MlpModel(std::vector<DenseLayer> layers);

  /// Glorot-uniform weights, zero biases.
  static MlpModel glorot(std::vector<std::size_t> layer_dims, Rng& rng);

  const std::vector<std::size_t>& layer_dims() const noexcept { return dims_; }
  std::size_t input_dim() const noexcept { return dims_.front(); }
  std::size_t output_dim() const noexcept { return dims_.back(); }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::size_t num_parameters() const noexcept;

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  bool operator==(const MlpModel&) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
};

/// Parameter gradients, shaped like the model's layers.
struct Gradients {
  std::vector<DenseLayer> layers;

  static Gradients zeros_like(const MlpModel& model);
  /// this += scale · other.
  void add_scaled(const Gradients& other, double scale = 1.0);
};

struct ForwardResult {
  Matrix logits;
  Matrix features;
};

/// Activations kept for a subsequent backward pass. `activations[0]` is the
/// input, `activations[i]` the post-ReLU output of hidden layer i.
struct ForwardTrace {
  std::vector<Matrix> activations;
  Matrix logits;

  const Matrix& features() const { return activations.back(); }
};

ForwardResult forward(const MlpModel& model, const Matrix& batch);
ForwardTrace forward_trace(const MlpModel& model, const Matrix& batch);

/// Gradients of the scalar loss whose logit gradient is `grad_logits`.
/// The ReLU subgradient at a zero pre-activation is taken as 0.
Gradients backward(const MlpModel& model, const ForwardTrace& trace, const Matrix& grad_logits);
Gradients backward(const MlpModel& model, const Matrix& batch, const Matrix& grad_logits);

/// SGD with momentum and coupled weight decay:
///   v ← momentum·v + grad + weight_decay·param;  param ← param − lr·v
/// Weight decay applies to biases as well.
struct OptimizerState {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  Gradients velocity;

  static OptimizerState for_model(const MlpModel& model, double learning_rate, double momentum,
                                  double weight_decay);
};

void sgd_step(MlpModel& model, const Gradients& grads, OptimizerState& opt);

}  // namespace openmix
