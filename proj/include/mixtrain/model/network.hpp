#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mixtrain/numerics/rng.hpp"
#include "mixtrain/numerics/tensor.hpp"

namespace mixtrain::model {

using numerics::DimensionError;
using numerics::Mat32;
using numerics::Vec32;

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// One affine layer; weight is (outputs x inputs).
struct Layer {
  Mat32 weight;
  Vec32 bias;
};

// Fully-connected classifier: ReLU after every layer except the last.
class Network {
 public:
  Network() = default;

  explicit Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw DimensionError("Network: needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      if (l.bias.size() != l.weight.rows()) {
        throw DimensionError("Network: layer " + std::to_string(i) + " bias length " +
                             std::to_string(l.bias.size()) + " != rows " +
                             std::to_string(l.weight.rows()));
      }
      if (i > 0 && layers_[i - 1].weight.rows() != l.weight.cols()) {
        throw DimensionError("Network: layer " + std::to_string(i) +
                             " input width does not match previous output width");
      }
    }
    if (output_dim() < 2) throw DimensionError("Network: need at least 2 output logits");
  }

  // Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
  static Network kaiming(std::span<const std::size_t> sizes, numerics::Rng& rng) {
    if (sizes.size() < 2) throw DimensionError("Network::kaiming: need input and output sizes");
    std::vector<Layer> layers;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      const std::size_t in = sizes[i];
      const std::size_t out = sizes[i + 1];
      const auto bound = static_cast<float>(std::sqrt(6.0 / static_cast<double>(in)));
      Mat32 w(out, in);
      for (float& v : w.span()) v = rng.uniform(-bound, bound);
      layers.push_back({std::move(w), Vec32(out)});
    }
    return Network(std::move(layers));
  }

  [[nodiscard]] std::size_t input_dim() const noexcept { return layers_.front().weight.cols(); }
  [[nodiscard]] std::size_t output_dim() const noexcept { return layers_.back().weight.rows(); }
  [[nodiscard]] std::size_t depth() const noexcept { return layers_.size(); }
  [[nodiscard]] const std::vector<Layer>& layers() const noexcept { return layers_; }
  [[nodiscard]] const Layer& layer(std::size_t i) const { return layers_.at(i); }
  // Write access for optimizers; shapes must not change.
  [[nodiscard]] Layer& mutable_layer(std::size_t i) { return layers_.at(i); }

  [[nodiscard]] std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s{input_dim()};
    for (const auto& l : layers_) s.push_back(l.weight.rows());
    return s;
  }

  [[nodiscard]] std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.rows() * l.weight.cols() + l.bias.size();
    return n;
  }

  friend bool operator==(const Network& a, const Network& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t i = 0; i < a.layers_.size(); ++i) {
      if (!(a.layers_[i].weight == b.layers_[i].weight) ||
          !(a.layers_[i].bias == b.layers_[i].bias)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Layer> layers_;
};

namespace detail {
inline void check_input(const Network& net, std::size_t n) {
  if (n != net.input_dim()) {
    throw DimensionError("input has " + std::to_string(n) + " features, network expects " +
                         std::to_string(net.input_dim()));
  }
}

// z = W a + b, accumulated in double.
template <typename Real>
void affine(const Layer& layer, std::span<const Real> a, std::vector<Real>& z) {
  const auto& w = layer.weight;
  z.resize(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const float* row = w.data() + r * w.cols();
    double s = layer.bias[r];
    for (std::size_t c = 0; c < w.cols(); ++c) {
      s += static_cast<double>(row[c]) * static_cast<double>(a[c]);
    }
    z[r] = static_cast<Real>(s);
  }
}
}  // namespace detail

// Logits for input x, computed with Real-typed activations. evaluate<double>
// is the 64-bit shadow of the float forward pass.
template <typename Real = float>
std::vector<Real> evaluate(const Network& net, std::span<const float> x) {
  detail::check_input(net, x.size());
  std::vector<Real> a(x.begin(), x.end());
  std::vector<Real> z;
  for (std::size_t i = 0; i < net.depth(); ++i) {
    detail::affine<Real>(net.layer(i), a, z);
    if (i + 1 < net.depth()) {
      for (Real& v : z) v = v > Real(0) ? v : Real(0);
    }
    a.swap(z);
  }
  return a;
}

inline std::vector<float> forward(const Network& net, std::span<const float> x) {
  return evaluate<float>(net, x);
}

inline std::size_t argmax(std::span<const float> v) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

template <typename Real>
std::size_t argmax(const std::vector<Real>& v) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// Strictly correct: the label logit beats every other logit. Ties count as
// misclassified, matching the tie rule used for verification.
template <typename Real>
bool strictly_correct(const std::vector<Real>& logits, std::size_t y) noexcept {
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (j != y && !(logits[y] > logits[j])) return false;
  }
  return true;
}

// Classification and violation checks share the 64-bit evaluation so a
// float-rounding artifact is never reported as an adversarial example.
inline bool predicts(const Network& net, std::span<const float> x, std::size_t y) {
  return strictly_correct(evaluate<double>(net, x), y);
}

inline bool is_violation(const Network& net, std::span<const float> x, std::size_t y) {
  return !predicts(net, x, y);
}

}  // namespace mixtrain::model
