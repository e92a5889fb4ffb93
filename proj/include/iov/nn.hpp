#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iov/rng.hpp"

namespace iov::nn {

/// Fully connected network with tanh hidden layers and a linear output.
/// Parameters live in one flat vector: for each layer, the row-major
/// (out x in) weight matrix followed by the bias.
class Mlp {
 public:
  /// Activations recorded by forward() for backward().
  struct Tape {
    std::vector<std::vector<double>> layers;  // layers[0] = input, then each layer's output
  };

  Mlp() = default;
  /// sizes = {input, hidden..., output}; at least two entries.
  explicit Mlp(std::vector<std::size_t> sizes);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases; the
  /// output layer is additionally scaled by `output_scale`.
  void init(Rng& rng, double output_scale = 1.0);

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Throws ConfigError on an input of the wrong length.
  std::vector<double> forward(std::span<const double> input, Tape* tape = nullptr) const;

  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
  void backward(const Tape& tape, std::span<const double> grad_output, std::span<double> grad) const;

  /// {"layer0.weight": [...], "layer0.bias": [...], ...}
  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

  bool all_finite() const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// Plain SGD with classical momentum.
class SgdMomentum {
 public:
  SgdMomentum(double learning_rate = 1e-3, double momentum = 0.9)
      : lr_(learning_rate), momentum_(momentum) {}

  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_;
  double momentum_;
  std::vector<double> velocity_;
};

}  // namespace iov::nn
