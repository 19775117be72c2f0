#pragma once

// Networks and oracles shared by the unit and acceptance tests.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mixtrain/mixtrain.hpp"

namespace fixtures {

using mixtrain::model::Layer;
using mixtrain::model::Network;
using mixtrain::numerics::Mat32;
using mixtrain::numerics::Rng;
using mixtrain::numerics::Vec32;

inline Layer make_layer(std::size_t rows, std::size_t cols, std::vector<float> w, std::vector<float> b) {
  return Layer{Mat32(rows, cols, std::move(w)), Vec32(std::move(b))};
}

// Kaiming weights plus small random biases, so ReLUs actually cross.
inline Network random_net(std::span<const std::size_t> sizes, Rng& rng, float bias = 0.1F) {
  auto net = Network::kaiming(sizes, rng);
  for (std::size_t li = 0; li < net.depth(); ++li) {
    auto& b = net.mutable_layer(li).bias;
    for (std::size_t j = 0; j < b.size(); ++j) b.data()[j] = rng.uniform(-bias, bias);
  }
  return net;
}

inline Network random_net(std::initializer_list<std::size_t> sizes, Rng& rng, float bias = 0.1F) {
  const std::vector<std::size_t> s(sizes);
  return random_net(s, rng, bias);
}

inline std::vector<float> random_point(std::size_t d, Rng& rng, float lo = 0.0F, float hi = 1.0F) {
  std::vector<float> x(d);
  for (auto& v : x) v = rng.uniform(lo, hi);
  return x;
}

inline std::vector<float> sample_in(const mixtrain::analysis::Box& box, Rng& rng) {
  std::vector<float> x(box.dim());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(box.lo(i), box.hi(i));
  return x;
}

// Hidden z = 4x - 2, output logit1 = relu(z) + 1, logit0 = 0, over x in
// [0, 1]. The crossing ReLU relaxes to the parallel pair [2x - 1, 2x], so the
// logit is bounded by [2x, 2x + 1].
inline Network two_slope_net() {
  return Network({make_layer(1, 1, {4.0F}, {-2.0F}), make_layer(2, 1, {0.0F, 1.0F}, {0.0F, 1.0F})});
}

// ---------------------------------------------------------------------------
// Shelf net: one input in [0, 1], label 0, logit0 = 0 and logit1 = m(x) with
// m piecewise linear:
//   [0.1, 0.86]  rising trend from -3 to -1 cut into 0.02-wide teeth (short
//                steep rise, long gentle fall), so sign-gradient ascent with
//                0.01 steps stalls on a tooth;
//   [0.86, c0]   falls to -2;
//   [c0, c1]     a 1e-6 wide cliff up to +0.5;
//   [c1, 1]      flat at +0.5.
// Around x = 0.5 with eps = 0.4 the only violations sit in [c1, 0.9], a
// sliver that random starts essentially never reach, while the secant slope
// over any region wider than a tooth points straight at it.
inline constexpr float kShelfCenter = 0.5F;
inline constexpr float kShelfEps = 0.4F;
inline constexpr double kShelfCliffStart = 0.899997;
inline constexpr double kShelfCliffEnd = 0.899998;

inline Network shelf_net() {
  struct Segment {
    double start;
    double slope;
  };
  std::vector<Segment> segs;
  const double trend_lo = 0.1;
  const double trend_hi = 0.86;
  const double period = 0.02;
  const double rise_len = 0.002;
  const double fall_slope = -3.0;
  const double trend = 2.0 / (trend_hi - trend_lo);
  const double rise_slope = (trend * period - fall_slope * (period - rise_len)) / rise_len;
  const auto teeth = static_cast<int>(std::lround((trend_hi - trend_lo) / period));
  segs.push_back({0.0, fall_slope});
  for (int t = 0; t < teeth; ++t) {
    const double v = trend_lo + period * t;
    segs.push_back({v, rise_slope});
    segs.push_back({v + rise_len, fall_slope});
  }
  segs.push_back({trend_hi, -1.0 / (kShelfCliffStart - trend_hi)});
  segs.push_back({kShelfCliffStart, 2.5 / (kShelfCliffEnd - kShelfCliffStart)});
  segs.push_back({kShelfCliffEnd, 0.0});

  // m(x) = m(0) + sum_i (slope_i - slope_{i-1}) relu(x - start_i), with the
  // first segment's slope carried by relu(x) (x >= 0 on the domain).
  // m(0) is chosen so that m(0.1) = -3.
  const double m0 = -3.0 - fall_slope * trend_lo;
  const std::size_t h = segs.size();
  std::vector<float> w1(h, 1.0F);
  std::vector<float> b1(h);
  std::vector<float> w2(2 * h, 0.0F);
  double prev = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    b1[i] = static_cast<float>(-segs[i].start);
    w2[h + i] = static_cast<float>(segs[i].slope - prev);
    prev = segs[i].slope;
  }
  return Network({make_layer(h, 1, std::move(w1), std::move(b1)),
                  make_layer(2, h, std::move(w2), {0.0F, static_cast<float>(m0)})});
}

inline mixtrain::data::Dataset shelf_dataset() {
  mixtrain::data::Dataset ds;
  ds.num_classes = 2;
  ds.provenance = "shelf";
  ds.samples.push_back({Vec32{kShelfCenter}, 0});
  return ds;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle for two-input nets: an n x n grid over the box plus its
// four corners. Returns true if any point is a confirmed violation.
inline bool grid_finds_violation(const Network& net, const mixtrain::analysis::Box& box,
                                 std::size_t y, std::size_t n) {
  std::vector<float> x(2);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      x[0] = a ? box.hi(0) : box.lo(0);
      x[1] = b ? box.hi(1) : box.lo(1);
      if (mixtrain::model::is_violation(net, x, y)) return true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    x[0] = static_cast<float>(box.lo(0) + (static_cast<double>(box.hi(0)) - box.lo(0)) * i / (n - 1));
    for (std::size_t j = 0; j < n; ++j) {
      x[1] = static_cast<float>(box.lo(1) + (static_cast<double>(box.hi(1)) - box.lo(1)) * j / (n - 1));
      if (mixtrain::model::is_violation(net, x, y)) return true;
    }
  }
  return false;
}

}  // namespace fixtures
