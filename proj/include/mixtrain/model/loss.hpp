#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mixtrain::model {

// Softmax cross-entropy, stabilized by subtracting the max logit.
template <typename Real>
Real cross_entropy(std::span<const Real> logits, std::size_t y) {
  const Real m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (Real v : logits) sum += std::exp(static_cast<double>(v - m));
  return static_cast<Real>(std::log(sum) - static_cast<double>(logits[y] - m));
}

template <typename Real>
Real cross_entropy(const std::vector<Real>& logits, std::size_t y) {
  return cross_entropy(std::span<const Real>(logits), y);
}

// d CE / d logits = softmax(logits) - onehot(y).
template <typename Real>
std::vector<Real> cross_entropy_grad(std::span<const Real> logits, std::size_t y) {
  const Real m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> e(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(static_cast<double>(logits[i] - m));
    sum += e[i];
  }
  std::vector<Real> g(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    g[i] = static_cast<Real>(e[i] / sum - (i == y ? 1.0 : 0.0));
  }
  return g;
}

template <typename Real>
std::vector<Real> cross_entropy_grad(const std::vector<Real>& logits, std::size_t y) {
  return cross_entropy_grad(std::span<const Real>(logits), y);
}

// Mean cross-entropy over a batch of logit vectors.
template <typename Real>
Real mean_cross_entropy(const std::vector<std::vector<Real>>& logits,
                        std::span<const std::size_t> labels) {
  if (logits.empty()) return Real(0);
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) s += cross_entropy(logits[i], labels[i]);
  return static_cast<Real>(s / static_cast<double>(logits.size()));
}

}  // namespace mixtrain::model
