#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mixtrain/numerics/rounding.hpp"
#include "mixtrain/numerics/tensor.hpp"

namespace mixtrain::analysis {

using numerics::DimensionError;

// Valid inputs in the network's (normalized) coordinates, plus the factor that
// converts a pixel-scale L-inf radius into each coordinate (1 / sigma).
struct InputDomain {
  std::vector<float> lo;
  std::vector<float> hi;
  std::vector<float> radius_scale;

  static InputDomain uniform(std::size_t dim, float lo, float hi, float radius_scale = 1.0F) {
    return {std::vector<float>(dim, lo), std::vector<float>(dim, hi),
            std::vector<float>(dim, radius_scale)};
  }
  static InputDomain unit(std::size_t dim) { return uniform(dim, 0.0F, 1.0F); }

  [[nodiscard]] std::size_t dim() const noexcept { return lo.size(); }
};

// Axis-aligned input region. Endpoints flagged as pinned sit on the domain
// boundary and do not move when the box is translated.
class Box {
 public:
  Box() = default;

  // B_eps(center) intersected with the domain, rounded outward.
  static Box around(std::span<const float> center, float eps, const InputDomain& domain) {
    if (center.size() != domain.dim()) {
      throw DimensionError("Box::around: center has " + std::to_string(center.size()) +
                           " dims, domain has " + std::to_string(domain.dim()));
    }
    if (!(eps >= 0.0F)) throw std::invalid_argument("Box::around: eps must be >= 0");
    Box b;
    const std::size_t n = center.size();
    b.lo_.resize(n);
    b.hi_.resize(n);
    b.lo_pinned_.assign(n, false);
    b.hi_pinned_.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = static_cast<double>(eps) * domain.radius_scale[i];
      float lo = eps == 0.0F ? center[i] : numerics::down_from(center[i] - r);
      float hi = eps == 0.0F ? center[i] : numerics::up_from(center[i] + r);
      if (lo <= domain.lo[i]) {
        lo = domain.lo[i];
        b.lo_pinned_[i] = true;
      }
      if (hi >= domain.hi[i]) {
        hi = domain.hi[i];
        b.hi_pinned_[i] = true;
      }
      b.lo_[i] = std::min(lo, center[i]);
      b.hi_[i] = std::max(hi, center[i]);
    }
    return b;
  }

  static Box from_bounds(std::vector<float> lo, std::vector<float> hi) {
    if (lo.size() != hi.size()) throw DimensionError("Box::from_bounds: length mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (!(lo[i] <= hi[i])) throw std::invalid_argument("Box::from_bounds: lo > hi");
    }
    Box b;
    b.lo_pinned_.assign(lo.size(), false);
    b.hi_pinned_.assign(lo.size(), false);
    b.lo_ = std::move(lo);
    b.hi_ = std::move(hi);
    return b;
  }

  [[nodiscard]] std::size_t dim() const noexcept { return lo_.size(); }
  [[nodiscard]] std::span<const float> lo() const noexcept { return lo_; }
  [[nodiscard]] std::span<const float> hi() const noexcept { return hi_; }
  [[nodiscard]] float lo(std::size_t i) const noexcept { return lo_[i]; }
  [[nodiscard]] float hi(std::size_t i) const noexcept { return hi_[i]; }
  [[nodiscard]] float width(std::size_t i) const noexcept { return hi_[i] - lo_[i]; }
  [[nodiscard]] bool lo_pinned(std::size_t i) const noexcept { return lo_pinned_[i]; }
  [[nodiscard]] bool hi_pinned(std::size_t i) const noexcept { return hi_pinned_[i]; }

  [[nodiscard]] std::vector<float> midpoint() const {
    std::vector<float> m(dim());
    for (std::size_t i = 0; i < dim(); ++i) m[i] = lo_[i] + (hi_[i] - lo_[i]) * 0.5F;
    return m;
  }

  [[nodiscard]] bool contains(std::span<const float> x) const noexcept {
    for (std::size_t i = 0; i < dim(); ++i) {
      if (!(lo_[i] <= x[i] && x[i] <= hi_[i])) return false;
    }
    return true;
  }

  // Halves along `dim`; both children share the split plane. Pinned flags are
  // inherited on the outer faces only.
  [[nodiscard]] std::pair<Box, Box> bisect(std::size_t dim_index) const {
    Box left = *this;
    Box right = *this;
    float mid = lo_[dim_index] + (hi_[dim_index] - lo_[dim_index]) * 0.5F;
    mid = std::clamp(mid, lo_[dim_index], hi_[dim_index]);
    left.hi_[dim_index] = mid;
    left.hi_pinned_[dim_index] = false;
    right.lo_[dim_index] = mid;
    right.lo_pinned_[dim_index] = false;
    return {std::move(left), std::move(right)};
  }

  [[nodiscard]] bool is_subset_of(const Box& outer) const noexcept {
    for (std::size_t i = 0; i < dim(); ++i) {
      if (lo_[i] < outer.lo_[i] || hi_[i] > outer.hi_[i]) return false;
    }
    return true;
  }

 private:
  std::vector<float> lo_;
  std::vector<float> hi_;
  std::vector<bool> lo_pinned_;
  std::vector<bool> hi_pinned_;
};

}  // namespace mixtrain::analysis
