#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "openmix/datasets.hpp"
#include "openmix/matrix.hpp"
#include "openmix/mlp.hpp"
#include "openmix/objectives.hpp"
#include "openmix/rng.hpp"

namespace openmix::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal(0.0, scale);
  return m;
}

inline LabeledDataset random_batch(std::size_t n, std::size_t d, std::size_t k, Rng& rng) {
  LabeledDataset ds;
  ds.features = random_matrix(n, d, rng);
  ds.num_classes = k;
  for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(rng.index(k));
  return ds;
}

/// Glorot weights plus small random biases, so no unit starts exactly at a kink.
inline MlpModel random_model(std::vector<std::size_t> dims, Rng& rng) {
  auto model = MlpModel::glorot(std::move(dims), rng);
  for (auto& layer : model.layers()) {
    for (double& b : layer.bias) b = rng.normal(0.0, 0.1);
  }
  return model;
}

inline std::vector<double*> parameters(MlpModel& model) {
  std::vector<double*> out;
  for (auto& layer : model.layers()) {
    for (double& w : layer.weights.data()) out.push_back(&w);
    for (double& b : layer.bias) out.push_back(&b);
  }
  return out;
}

inline std::vector<double> flatten(const Gradients& g) {
  std::vector<double> out;
  for (const auto& layer : g.layers) {
    for (double w : layer.weights.data()) out.push_back(w);
    for (double b : layer.bias) out.push_back(b);
  }
  return out;
}

/// Central-difference gradient of the loss with step h on every parameter.
inline std::vector<double> numeric_gradient(MlpModel model,
                                            const std::function<BatchLoss(const MlpModel&)>& loss,
                                            double h = 1e-6) {
  auto params = parameters(model);
  std::vector<double> numeric(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + h;
    const double up = loss(model).loss;
    *params[i] = saved - h;
    const double down = loss(model).loss;
    *params[i] = saved;
    numeric[i] = (up - down) / (2.0 * h);
  }
  return numeric;
}

/// ‖a − b‖₂ / (‖a‖₂ + ‖b‖₂); 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

/// Relative error between the analytic gradient and central differences.
inline double gradient_relative_error(const MlpModel& model,
                                      const std::function<BatchLoss(const MlpModel&)>& loss,
                                      double h = 1e-6) {
  return relative_error(flatten(loss(model).grads), numeric_gradient(model, loss, h));
}

}  // namespace openmix::testing
