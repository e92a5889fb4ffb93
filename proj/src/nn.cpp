#include "iov/nn.hpp"

#include <algorithm>
#include <cmath>

#include "iov/error.hpp"

namespace iov::nn {

Mlp::Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ConfigError("network.sizes", "need input and output sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

void Mlp::init(Rng& rng, double output_scale) {
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    const double scale = l + 1 == layers ? output_scale : 1.0;
    const std::size_t w = weight_offset(l);
    for (std::size_t i = 0; i < sizes_[l] * sizes_[l + 1]; ++i) {
      params_[w + i] = scale * rng.uniform(-bound, bound);
    }
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(bias_offset(l)), sizes_[l + 1], 0.0);
  }
}

std::vector<double> Mlp::forward(std::span<const double> input, Tape* tape) const {
  if (input.size() != input_size()) {
    throw ConfigError("network.input", "expected " + std::to_string(input_size()) +
                                           " features, got " + std::to_string(input.size()));
  }
  std::vector<double> x(input.begin(), input.end());
  if (tape) {
    tape->layers.clear();
    tape->layers.push_back(x);
  }
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    std::vector<double> y(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = l + 1 == layers ? acc : std::tanh(acc);
    }
    x = std::move(y);
    if (tape) tape->layers.push_back(x);
  }
  return x;
}

void Mlp::backward(const Tape& tape, std::span<const double> grad_output,
                   std::span<double> grad) const {
  const std::size_t layers = sizes_.size() - 1;
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    if (l + 1 != layers) {
      // through tanh: d/dz = 1 - y^2
      const auto& y = tape.layers[l + 1];
      for (std::size_t o = 0; o < out; ++o) delta[o] *= 1.0 - y[o] * y[o];
    }
    const auto& x = tape.layers[l];
    double* gw = grad.data() + weight_offset(l);
    double* gb = grad.data() + bias_offset(l);
    const double* w = params_.data() + weight_offset(l);
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      gb[o] += d;
      double* grow = gw + o * in;
      const double* wrow = w + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        grow[i] += d * x[i];
        prev[i] += d * wrow[i];
      }
    }
    delta = std::move(prev);
  }
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  j["sizes"] = sizes_;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto w0 = params_.begin() + static_cast<std::ptrdiff_t>(weight_offset(l));
    const auto b0 = params_.begin() + static_cast<std::ptrdiff_t>(bias_offset(l));
    j["layer" + std::to_string(l) + ".weight"] =
        std::vector<double>(w0, w0 + static_cast<std::ptrdiff_t>(sizes_[l] * sizes_[l + 1]));
    j["layer" + std::to_string(l) + ".bias"] =
        std::vector<double>(b0, b0 + static_cast<std::ptrdiff_t>(sizes_[l + 1]));
  }
  return j;
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp m(j.at("sizes").get<std::vector<std::size_t>>());
  for (std::size_t l = 0; l + 1 < m.sizes_.size(); ++l) {
    const auto w = j.at("layer" + std::to_string(l) + ".weight").get<std::vector<double>>();
    const auto b = j.at("layer" + std::to_string(l) + ".bias").get<std::vector<double>>();
    if (w.size() != m.sizes_[l] * m.sizes_[l + 1] || b.size() != m.sizes_[l + 1]) {
      throw ConfigError("checkpoint.layer" + std::to_string(l), "shape mismatch");
    }
    std::copy(w.begin(), w.end(), m.params_.begin() + static_cast<std::ptrdiff_t>(m.weight_offset(l)));
    std::copy(b.begin(), b.end(), m.params_.begin() + static_cast<std::ptrdiff_t>(m.bias_offset(l)));
  }
  return m;
}

bool Mlp::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double x) { return std::isfinite(x); });
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += p[i] = std::exp(logits[i] - top);
  for (auto& x : p) x /= sum;
  return p;
}

void SgdMomentum::step(std::span<double> params, std::span<const double> grad) {
  if (velocity_.size() != params.size()) velocity_.assign(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] + grad[i];
    params[i] -= lr_ * velocity_[i];
  }
}

}  // namespace iov::nn
