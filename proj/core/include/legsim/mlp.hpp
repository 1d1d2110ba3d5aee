#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace legsim {

class Rng;

/// Fully connected network with tanh hidden layers and a linear output.
/// Parameters live in one flat vector: for each layer the out x in weight
/// matrix (row-major) followed by its biases.
class Mlp {
 public:
  struct Cache {
    // Input followed by the output of every layer.
    std::vector<std::vector<double>> activations;
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  std::size_t layers() const { return sizes_.empty() ? 0 : sizes_.size() - 1; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> biases(std::size_t layer);
  std::span<const double> biases(std::size_t layer) const;

  // Scaled normal weights (gain / sqrt(fan_in)), zero biases. The last layer
  // uses `output_gain`.
  void initialize(Rng& rng, double output_gain);

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward(std::span<const double> x, Cache& cache) const;

  // Adds dL/dparameters to `grad` given dL/doutput; returns dL/dinput.
  std::vector<double> backward(const Cache& cache, std::span<const double> grad_out,
                               std::span<double> grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
};

/// Adaptive-moment optimizer minimizing a loss:
///   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2,
///   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps).
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grad);
  long steps() const { return t_; }

 private:
  double lr_ = 3e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace legsim
