#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "mixtrain/data/dataset.hpp"
#include "mixtrain/numerics/rng.hpp"

namespace mixtrain::data {

// Geometry of the two moons inside [0, 1]^2. The classic unit-radius moons
// are scaled uniformly by 1/3 so the arcs stay circular: the upper arc bulges
// up around kMoonUpper*, the lower arc bulges down around kMoonLower*.
inline constexpr double kMoonRadius = 1.0 / 3.0;
inline constexpr double kMoonUpperCx = 1.0 / 3.0;
inline constexpr double kMoonUpperCy = 0.5 / 3.0 + 0.25;
inline constexpr double kMoonLowerCx = 2.0 / 3.0;
inline constexpr double kMoonLowerCy = 1.0 / 3.0 + 0.25;

// Two interleaved half circles, n/2 points each (label 0 upper, 1 lower),
// with isotropic Gaussian noise, clamped to [0, 1]^2.
inline Dataset synth_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("synth_moons: n must be >= 2");
  numerics::Rng rng(seed);
  Dataset ds;
  ds.num_classes = 2;
  ds.provenance = "moons:n=" + std::to_string(n) + ",seed=" + std::to_string(seed);
  const std::size_t n_upper = n / 2 + n % 2;
  for (std::size_t i = 0; i < n; ++i) {
    const bool upper = i < n_upper;
    const std::size_t m = upper ? n_upper : n - n_upper;
    const std::size_t k = upper ? i : i - n_upper;
    const double t = m > 1 ? std::numbers::pi * static_cast<double>(k) / static_cast<double>(m - 1) : 0.0;
    double px = upper ? kMoonUpperCx + kMoonRadius * std::cos(t) : kMoonLowerCx - kMoonRadius * std::cos(t);
    double py = upper ? kMoonUpperCy + kMoonRadius * std::sin(t) : kMoonLowerCy - kMoonRadius * std::sin(t);
    if (noise > 0.0) {
      px += noise * rng.normal();
      py += noise * rng.normal();
    }
    ds.samples.push_back({Vec32{static_cast<float>(std::clamp(px, 0.0, 1.0)),
                                static_cast<float>(std::clamp(py, 0.0, 1.0))},
                          upper ? 0U : 1U});
  }
  // Interleave classes so any prefix is balanced.
  std::span<Sample> all(ds.samples);
  rng.shuffle(all);
  return ds;
}

// k Gaussian blobs with centers evenly spaced on a circle of radius 0.3
// around (0.5, 0.5), clamped to [0, 1]^2. Round-robin labels.
inline Dataset synth_blobs(std::size_t n, std::size_t k, double spread, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("synth_blobs: n must be >= 2");
  if (k < 2) throw std::invalid_argument("synth_blobs: need at least 2 classes");
  numerics::Rng rng(seed);
  Dataset ds;
  ds.num_classes = k;
  ds.provenance = "blobs:n=" + std::to_string(n) + ",k=" + std::to_string(k) +
                  ",seed=" + std::to_string(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = i % k;
    const double a = 2.0 * std::numbers::pi * static_cast<double>(y) / static_cast<double>(k);
    const double cx = 0.5 + 0.3 * std::cos(a);
    const double cy = 0.5 + 0.3 * std::sin(a);
    const double px = cx + spread * rng.normal();
    const double py = cy + spread * rng.normal();
    ds.samples.push_back({Vec32{static_cast<float>(std::clamp(px, 0.0, 1.0)),
                                static_cast<float>(std::clamp(py, 0.0, 1.0))},
                          y});
  }
  return ds;
}

}  // namespace mixtrain::data
