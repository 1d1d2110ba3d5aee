#include "legsim/mlp.hpp"

#include <cmath>
#include <string>

#include "legsim/errors.hpp"
#include "legsim/rng.hpp"

namespace legsim {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ConfigError("Mlp: need at least an input and an output size");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw ConfigError("Mlp: layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_.assign(total, 0.0);
}

std::span<double> Mlp::weights(std::size_t layer) {
  return {params_.data() + offsets_[layer],
          static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer]};
}

std::span<const double> Mlp::weights(std::size_t layer) const {
  return {params_.data() + offsets_[layer],
          static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer]};
}

std::span<double> Mlp::biases(std::size_t layer) {
  return {params_.data() + offsets_[layer] +
              static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer],
          static_cast<std::size_t>(sizes_[layer + 1])};
}

std::span<const double> Mlp::biases(std::size_t layer) const {
  return {params_.data() + offsets_[layer] +
              static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer],
          static_cast<std::size_t>(sizes_[layer + 1])};
}

void Mlp::initialize(Rng& rng, double output_gain) {
  for (std::size_t l = 0; l < layers(); ++l) {
    const double gain = l + 1 == layers() ? output_gain : 1.0;
    const double scale = gain / std::sqrt(static_cast<double>(sizes_[l]));
    for (double& w : weights(l)) w = scale * rng.normal();
    for (double& b : biases(l)) b = 0.0;
  }
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  Cache cache;
  return forward(x, cache);
}

std::vector<double> Mlp::forward(std::span<const double> x, Cache& cache) const {
  if (static_cast<int>(x.size()) != input_size()) {
    throw ConfigError("Mlp: expected input of size " + std::to_string(input_size()) + ", got " +
                      std::to_string(x.size()));
  }
  cache.activations.resize(sizes_.size());
  cache.activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers(); ++l) {
    const auto& in = cache.activations[l];
    auto& out = cache.activations[l + 1];
    const auto n_in = static_cast<std::size_t>(sizes_[l]);
    const auto n_out = static_cast<std::size_t>(sizes_[l + 1]);
    const auto w = weights(l);
    const auto b = biases(l);
    out.assign(n_out, 0.0);
    const bool hidden = l + 1 < layers();
    for (std::size_t o = 0; o < n_out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < n_in; ++i) acc += w[o * n_in + i] * in[i];
      out[o] = hidden ? std::tanh(acc) : acc;
    }
  }
  return cache.activations.back();
}

std::vector<double> Mlp::backward(const Cache& cache, std::span<const double> grad_out,
                                  std::span<double> grad) const {
  if (grad.size() != params_.size()) throw ConfigError("Mlp: gradient buffer has wrong size");
  std::vector<double> delta(grad_out.begin(), grad_out.end());
  for (std::size_t l = layers(); l-- > 0;) {
    const auto n_in = static_cast<std::size_t>(sizes_[l]);
    const auto n_out = static_cast<std::size_t>(sizes_[l + 1]);
    const auto& in = cache.activations[l];
    if (l + 1 < layers()) {
      const auto& out = cache.activations[l + 1];
      for (std::size_t o = 0; o < n_out; ++o) delta[o] *= 1.0 - out[o] * out[o];
    }
    const auto w = weights(l);
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + n_out * n_in;
    std::vector<double> prev(n_in, 0.0);
    for (std::size_t o = 0; o < n_out; ++o) {
      gb[o] += delta[o];
      for (std::size_t i = 0; i < n_in; ++i) {
        gw[o * n_in + i] += delta[o] * in[i];
        prev[i] += w[o * n_in + i] * delta[o];
      }
    }
    delta = std::move(prev);
  }
  return delta;
}

Adam::Adam(std::size_t n, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ConfigError("Adam: parameter and gradient sizes disagree with the optimizer");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
    params[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
  }
}

}  // namespace legsim
