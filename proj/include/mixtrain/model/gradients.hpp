#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mixtrain/model/network.hpp"

namespace mixtrain::model {

// Per-layer parameter gradients, shaped like the network.
template <typename Real = float>
struct Gradients {
  struct LayerGrad {
    std::vector<Real> weight;  // rows * cols, row-major
    std::vector<Real> bias;
  };
  std::vector<LayerGrad> layers;
  std::vector<Real> input;  // d loss / d x

  static Gradients zeros_like(const Network& net) {
    Gradients g;
    for (const auto& l : net.layers()) {
      g.layers.push_back({std::vector<Real>(l.weight.rows() * l.weight.cols(), Real(0)),
                          std::vector<Real>(l.bias.size(), Real(0))});
    }
    g.input.assign(net.input_dim(), Real(0));
    return g;
  }

  // this += scale * other (parameter part only).
  template <typename OtherReal>
  void add_scaled(const Gradients<OtherReal>& other, double scale) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      auto& w = layers[i].weight;
      const auto& ow = other.layers[i].weight;
      for (std::size_t j = 0; j < w.size(); ++j) w[j] += static_cast<Real>(scale * ow[j]);
      auto& b = layers[i].bias;
      const auto& ob = other.layers[i].bias;
      for (std::size_t j = 0; j < b.size(); ++j) b[j] += static_cast<Real>(scale * ob[j]);
    }
  }

  void scale(double s) {
    for (auto& l : layers) {
      for (auto& v : l.weight) v = static_cast<Real>(v * s);
      for (auto& v : l.bias) v = static_cast<Real>(v * s);
    }
  }
};

// Activations cached by one forward pass. backward() consumes it.
template <typename Real = float>
class GradientTape {
 public:
  [[nodiscard]] const std::vector<Real>& logits() const { return activations_.back(); }
  [[nodiscard]] bool consumed() const noexcept { return consumed_; }

 private:
  template <typename R>
  friend GradientTape<R> forward_tape(const Network&, std::span<const float>);
  template <typename R>
  friend Gradients<R> backward(const Network&, GradientTape<R>&, std::span<const R>);

  // activations_[0] = input, activations_[i+1] = output of layer i (post-ReLU
  // for hidden layers, logits for the last).
  std::vector<std::vector<Real>> activations_;
  bool consumed_ = false;
};

template <typename Real = float>
GradientTape<Real> forward_tape(const Network& net, std::span<const float> x) {
  detail::check_input(net, x.size());
  GradientTape<Real> tape;
  tape.activations_.emplace_back(x.begin(), x.end());
  for (std::size_t i = 0; i < net.depth(); ++i) {
    std::vector<Real> z;
    detail::affine<Real>(net.layer(i), tape.activations_.back(), z);
    if (i + 1 < net.depth()) {
      for (Real& v : z) v = v > Real(0) ? v : Real(0);
    }
    tape.activations_.push_back(std::move(z));
  }
  return tape;
}

// Reverse pass for d loss / d logits = dlogits. ReLU derivative at 0 is 0.
template <typename Real = float>
Gradients<Real> backward(const Network& net, GradientTape<Real>& tape,
                         std::span<const Real> dlogits) {
  if (tape.consumed_) throw ContractViolation("backward: gradient tape already consumed");
  if (tape.activations_.size() != net.depth() + 1 || dlogits.size() != net.output_dim()) {
    throw ContractViolation("backward: tape does not match network");
  }
  tape.consumed_ = true;

  auto grads = Gradients<Real>::zeros_like(net);
  std::vector<double> delta(dlogits.begin(), dlogits.end());
  for (std::size_t li = net.depth(); li-- > 0;) {
    const auto& layer = net.layer(li);
    const auto& a_in = tape.activations_[li];
    const std::size_t rows = layer.weight.rows();
    const std::size_t cols = layer.weight.cols();
    auto& gw = grads.layers[li].weight;
    auto& gb = grads.layers[li].bias;
    std::vector<double> delta_in(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double d = delta[r];
      gb[r] = static_cast<Real>(d);
      if (d == 0.0) continue;
      const float* wrow = layer.weight.data() + r * cols;
      Real* grow = gw.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) {
        grow[c] = static_cast<Real>(d * static_cast<double>(a_in[c]));
        delta_in[c] += d * static_cast<double>(wrow[c]);
      }
    }
    // Through the ReLU that produced a_in (none in front of the input).
    if (li > 0) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (!(a_in[c] > Real(0))) delta_in[c] = 0.0;
      }
    }
    delta.swap(delta_in);
  }
  grads.input.assign(delta.size(), Real(0));
  for (std::size_t c = 0; c < delta.size(); ++c) grads.input[c] = static_cast<Real>(delta[c]);
  return grads;
}

template <typename Real = float>
Gradients<Real> backward(const Network& net, GradientTape<Real>& tape,
                         const std::vector<Real>& dlogits) {
  return backward<Real>(net, tape, std::span<const Real>(dlogits));
}

}  // namespace mixtrain::model
