#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mixtrain/model/gradients.hpp"
#include "mixtrain/model/network.hpp"
#include "mixtrain/train/config.hpp"

namespace mixtrain::train {

// SGD (optional momentum) or Adam over the float parameters. Moments are kept
// in double.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg, const model::Network& net)
      : cfg_(cfg), m_(model::Gradients<double>::zeros_like(net)), v_(m_) {}

  void step(model::Network& net, const model::Gradients<double>& g, std::size_t epoch) {
    ++t_;
    const double lr = cfg_.lr_at(epoch);
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t li = 0; li < net.depth(); ++li) {
      auto& layer = net.mutable_layer(li);
      apply(layer.weight.data(), g.layers[li].weight, m_.layers[li].weight, v_.layers[li].weight, lr, c1, c2);
      apply(layer.bias.data(), g.layers[li].bias, m_.layers[li].bias, v_.layers[li].bias, lr, c1, c2);
    }
  }

  [[nodiscard]] std::size_t steps() const noexcept { return t_; }

 private:
  void apply(float* w, const std::vector<double>& g, std::vector<double>& m, std::vector<double>& v,
             double lr, double c1, double c2) const {
    if (cfg_.kind == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        m[i] = cfg_.momentum * m[i] + g[i];
        w[i] = static_cast<float>(w[i] - lr * m[i]);
      }
      return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      w[i] = static_cast<float>(w[i] - lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.adam_eps));
    }
  }

  OptimizerConfig cfg_;
  model::Gradients<double> m_;
  model::Gradients<double> v_;
  std::size_t t_ = 0;
};

}  // namespace mixtrain::train
