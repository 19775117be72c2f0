#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mixtrain/numerics/rounding.hpp"

namespace mixtrain::numerics {

// Closed float interval [lo, hi] with outward-rounded arithmetic. Every
// operation returns an interval containing the exact real result. Overflow
// saturates to +-inf; saturated() reports it.
class Interval {
 public:
  constexpr Interval() noexcept = default;
  constexpr explicit Interval(float point) noexcept : lo_(point), hi_(point) {}
  Interval(float lo, float hi) : lo_(lo), hi_(hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
      throw std::invalid_argument("Interval: requires lo <= hi and no NaN");
    }
  }

  [[nodiscard]] constexpr float lo() const noexcept { return lo_; }
  [[nodiscard]] constexpr float hi() const noexcept { return hi_; }
  [[nodiscard]] float width() const noexcept { return hi_ - lo_; }
  [[nodiscard]] bool contains(double v) const noexcept { return lo_ <= v && v <= hi_; }
  [[nodiscard]] bool contains(const Interval& o) const noexcept {
    return lo_ <= o.lo_ && o.hi_ <= hi_;
  }
  [[nodiscard]] bool saturated() const noexcept { return std::isinf(lo_) || std::isinf(hi_); }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  // Endpoints produced internally are already ordered; skip the check.
  struct Unchecked {};
  constexpr Interval(float lo, float hi, Unchecked) noexcept : lo_(lo), hi_(hi) {}

  friend Interval outward(float lo, float hi) noexcept;

  float lo_ = 0.0F;
  float hi_ = 0.0F;
};

inline Interval outward(float lo, float hi) noexcept {
  return Interval(step_down(lo), step_up(hi), Interval::Unchecked{});
}

inline Interval operator+(const Interval& a, const Interval& b) noexcept {
  return outward(a.lo() + b.lo(), a.hi() + b.hi());
}

inline Interval operator-(const Interval& a, const Interval& b) noexcept {
  return outward(a.lo() - b.hi(), a.hi() - b.lo());
}

inline Interval operator*(const Interval& a, float c) noexcept {
  if (c >= 0.0F) {
    return outward(a.lo() * c, a.hi() * c);
  }
  return outward(a.hi() * c, a.lo() * c);
}

inline Interval operator*(float c, const Interval& a) noexcept { return a * c; }

inline Interval operator*(const Interval& a, const Interval& b) noexcept {
  const float p1 = a.lo() * b.lo();
  const float p2 = a.lo() * b.hi();
  const float p3 = a.hi() * b.lo();
  const float p4 = a.hi() * b.hi();
  // inf * 0 yields NaN; an empty-width operand of zero keeps the product at 0.
  auto fix = [](float p) { return std::isnan(p) ? 0.0F : p; };
  return outward(std::min({fix(p1), fix(p2), fix(p3), fix(p4)}),
                 std::max({fix(p1), fix(p2), fix(p3), fix(p4)}));
}

// max(., 0) is exact in floating point, so no outward step is needed.
inline Interval relu(const Interval& a) noexcept {
  return Interval(std::max(a.lo(), 0.0F), std::max(a.hi(), 0.0F));
}

inline Interval hull(const Interval& a, const Interval& b) noexcept {
  return Interval(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

inline std::ostream& operator<<(std::ostream& os, const Interval& i) {
  return os << '[' << i.lo() << ", " << i.hi() << ']';
}

}  // namespace mixtrain::numerics
