#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixtrain/numerics/interval.hpp"
#include "mixtrain/numerics/rounding.hpp"

namespace mixtrain::numerics {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
inline void require_finite(std::span<const float> values, const char* what) {
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": non-finite value");
    }
  }
}
}  // namespace detail

// Dense float vector. Public constructors reject NaN/Inf; element access is
// unchecked afterwards so hot loops stay plain.
class Vec32 {
 public:
  Vec32() = default;
  explicit Vec32(std::size_t n, float fill = 0.0F) : data_(n, fill) {
    detail::require_finite(data_, "Vec32");
  }
  Vec32(std::initializer_list<float> values) : data_(values) {
    detail::require_finite(data_, "Vec32");
  }
  explicit Vec32(std::vector<float> values) : data_(std::move(values)) {
    detail::require_finite(data_, "Vec32");
  }

  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
  float& operator[](std::size_t i) noexcept { return data_[i]; }
  float operator[](std::size_t i) const noexcept { return data_[i]; }
  [[nodiscard]] float* data() noexcept { return data_.data(); }
  [[nodiscard]] const float* data() const noexcept { return data_.data(); }
  [[nodiscard]] std::span<float> span() noexcept { return data_; }
  [[nodiscard]] std::span<const float> span() const noexcept { return data_; }
  [[nodiscard]] const std::vector<float>& values() const noexcept { return data_; }
  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  [[nodiscard]] auto begin() const noexcept { return data_.begin(); }
  [[nodiscard]] auto end() const noexcept { return data_.end(); }

  friend bool operator==(const Vec32&, const Vec32&) = default;

 private:
  std::vector<float> data_;
};

// Row-major float matrix.
class Mat32 {
 public:
  Mat32() = default;
  Mat32(std::size_t rows, std::size_t cols, float fill = 0.0F)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    detail::require_finite(data_, "Mat32");
  }
  Mat32(std::size_t rows, std::size_t cols, std::vector<float> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows * cols) {
      throw DimensionError("Mat32: storage length does not match shape");
    }
    detail::require_finite(data_, "Mat32");
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  float& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  float operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  [[nodiscard]] std::span<float> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] std::span<const float> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] float* data() noexcept { return data_.data(); }
  [[nodiscard]] const float* data() const noexcept { return data_.data(); }
  [[nodiscard]] std::span<const float> span() const noexcept { return data_; }
  [[nodiscard]] std::span<float> span() noexcept { return data_; }

  static Mat32 identity(std::size_t n) {
    Mat32 m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0F;
    return m;
  }

  friend bool operator==(const Mat32&, const Mat32&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

// Float dot product accumulated in double.
inline double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

inline Vec32 matvec(const Mat32& m, const Vec32& v) {
  if (m.cols() != v.size()) {
    throw DimensionError("matvec: matrix has " + std::to_string(m.cols()) +
                         " columns, vector has " + std::to_string(v.size()));
  }
  Vec32 out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out[r] = static_cast<float>(dot(m.row(r), v.span()));
  }
  return out;
}

// Outward-rounded enclosure of {M v : v_i in box_i}. Each row is accumulated
// in double; the accumulated error bound is added before rounding outward.
inline std::vector<Interval> matvec_interval(const Mat32& m, std::span<const Interval> v) {
  if (m.cols() != v.size()) {
    throw DimensionError("matvec_interval: matrix has " + std::to_string(m.cols()) +
                         " columns, interval vector has " + std::to_string(v.size()));
  }
  const double gamma = sum_error_factor(m.cols());
  std::vector<Interval> out;
  out.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double lo = 0.0;
    double hi = 0.0;
    double mag = 0.0;
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double w = row[c];
      if (w == 0.0) continue;
      const double a = w * v[c].lo();
      const double b = w * v[c].hi();
      lo += std::min(a, b);
      hi += std::max(a, b);
      mag += std::max(std::abs(a), std::abs(b));
    }
    const double err = gamma * mag;
    if (std::isnan(lo) || std::isnan(hi)) {
      constexpr float inf = std::numeric_limits<float>::infinity();
      out.push_back(Interval(-inf, inf));
      continue;
    }
    out.push_back(Interval(down_from(lo - err), up_from(hi + err)));
  }
  return out;
}

}  // namespace mixtrain::numerics
