#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

namespace mixtrain::numerics {

// Outward rounding is done by stepping one ulp toward -inf / +inf after the
// round-to-nearest float operation. No FPU mode switching.

inline float step_down(float v) noexcept {
  return std::nextafter(v, -std::numeric_limits<float>::infinity());
}

inline float step_up(float v) noexcept {
  return std::nextafter(v, std::numeric_limits<float>::infinity());
}

// Float lower/upper bound of a double value (nearest conversion, then one
// outward step). The step also covers double rounding errors up to 2^-25
// relative, which is how 64-bit accumulators are handed back to float.
inline float down_from(double v) noexcept {
  return step_down(static_cast<float>(v));
}

inline float up_from(double v) noexcept {
  return step_up(static_cast<float>(v));
}

// Worst-case relative error factor of a naive n-term double summation
// (Higham's gamma_n), with headroom for the products feeding it.
inline double sum_error_factor(std::size_t n) noexcept {
  constexpr double u = std::numeric_limits<double>::epsilon() / 2;
  const double nu = static_cast<double>(n + 2) * u;
  return nu / (1.0 - nu);
}

}  // namespace mixtrain::numerics
