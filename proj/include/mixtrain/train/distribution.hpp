#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mixtrain/analysis/box.hpp"
#include "mixtrain/analysis/symbolic.hpp"
#include "mixtrain/data/dataset.hpp"
#include "mixtrain/model/network.hpp"
#include "mixtrain/numerics/rng.hpp"

namespace mixtrain::train {

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  [[nodiscard]] std::size_t total() const {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

inline Histogram make_histogram(const std::vector<double>& values, double lo, double hi,
                                std::size_t bins) {
  Histogram h{lo, hi, std::vector<std::size_t>(values.empty() ? 0 : bins, 0)};
  if (values.empty()) return h;
  const double w = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  for (double v : values) {
    auto b = static_cast<std::size_t>(std::max(0.0, std::floor((v - lo) / w)));
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

// Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

struct RobustLossDistribution {
  std::vector<double> sampled;  // D_k
  std::vector<double> full;     // D_0
  Histogram sampled_hist;
  Histogram full_hist;
  double ks = 0.0;
};

// Verifiable robust loss over k samples drawn without replacement and over the
// whole set, binned on a shared range.
inline RobustLossDistribution subsample_robust_loss_distribution(
    const model::Network& net, const data::Dataset& data, std::size_t k, float eps,
    std::uint64_t seed, bool include_full = true, std::size_t bins = 20) {
  if (k > data.size()) throw std::invalid_argument("robust loss distribution: k > n");
  const auto domain = data.domain();
  auto loss_at = [&](std::size_t i) {
    const auto& s = data.samples[i];
    return static_cast<double>(
        analysis::verifiable_robust_loss(net, analysis::Box::around(s.x.span(), eps, domain), s.y));
  };
  RobustLossDistribution out;
  if (include_full) {
    for (std::size_t i = 0; i < data.size(); ++i) out.full.push_back(loss_at(i));
  }
  numerics::Rng rng(seed);
  auto idx = rng.sample_without_replacement(data.size(), k);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i : idx) out.sampled.push_back(include_full ? out.full[i] : loss_at(i));

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* v : {&out.sampled, &out.full}) {
    for (double x : *v) {
      if (!std::isfinite(x)) continue;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!(lo <= hi)) lo = hi = 0.0;
  out.sampled_hist = make_histogram(out.sampled, lo, hi, bins);
  out.full_hist = make_histogram(out.full, lo, hi, bins);
  out.ks = ks_statistic(out.sampled, out.full);
  return out;
}

}  // namespace mixtrain::train
