#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "mixtrain/numerics/interval.hpp"
#include "mixtrain/numerics/rng.hpp"
#include "mixtrain/numerics/tensor.hpp"

namespace {

using mixtrain::numerics::DimensionError;
using mixtrain::numerics::Interval;
using mixtrain::numerics::Mat32;
using mixtrain::numerics::Rng;
using mixtrain::numerics::Vec32;

float ulp_above(float v) { return std::nextafter(v, std::numeric_limits<float>::infinity()) - v; }

TEST(Interval, RejectsInvertedOrNaN) {
  EXPECT_THROW(Interval(2.0F, 1.0F), std::invalid_argument);
  EXPECT_THROW(Interval(std::nanf(""), 1.0F), std::invalid_argument);
  EXPECT_NO_THROW(Interval(1.0F, 1.0F));
}

TEST(Interval, AddSmallExample) {
  const auto r = Interval(1, 2) + Interval(3, 4);
  EXPECT_TRUE(r.contains(Interval(4, 6)));
  EXPECT_LE(r.width(), 2.0F + ulp_above(4.0F) + ulp_above(6.0F));
}

TEST(Interval, AddZeroIsIdentityUpToOutwardStep) {
  const Interval a(-0.3F, 1.7F);
  const auto r = Interval(0.0F) + a;
  EXPECT_TRUE(r.contains(a));
}

TEST(Interval, ScalarMultiplySwapsForNegative) {
  EXPECT_TRUE((Interval(-1, 2) * 3.0F).contains(Interval(-3, 6)));
  const auto n = Interval(-1, 2) * -3.0F;
  EXPECT_TRUE(n.contains(Interval(-6, 3)));
  EXPECT_LT(n.hi(), 3.1F);
  EXPECT_GT(n.lo(), -6.1F);
}

TEST(Interval, Relu) {
  const auto r = relu(Interval(-1, 2));
  EXPECT_EQ(r.lo(), 0.0F);
  EXPECT_EQ(r.hi(), 2.0F);
  EXPECT_EQ(relu(Interval(-3, -1)), Interval(0, 0));
}

TEST(Interval, TinyProductIsNeverFlushedToZero) {
  const auto r = Interval(1e-8F, 2e-8F) * 1000.0F;
  EXPECT_LE(r.lo(), 1e-5);
  EXPECT_GE(r.hi(), 2e-5);
  EXPECT_GT(r.lo(), 0.0F);
  EXPECT_FALSE(r.lo() == 0.0F && r.hi() == 0.0F);
}

TEST(Interval, OverflowSaturatesAndIsReported) {
  const float big = std::numeric_limits<float>::max();
  const auto r = Interval(big, big) + Interval(big, big);
  EXPECT_TRUE(r.saturated());
  EXPECT_TRUE(std::isinf(r.hi()));
  EXPECT_FALSE(Interval(1, 2).saturated());
}

// Endpoint arithmetic in double is exact for sums and products of floats,
// so it serves as the real-valued reference.
TEST(Interval, RandomizedContainmentMillionPairs) {
  Rng rng(11);
  std::size_t escapes = 0;
  for (int t = 0; t < 1'000'000; ++t) {
    const float a0 = rng.uniform(-100, 100);
    const float a1 = a0 + rng.uniform(0, 10);
    const float b0 = rng.uniform(-100, 100);
    const float b1 = b0 + rng.uniform(0, 10);
    const Interval a(a0, a1);
    const Interval b(b0, b1);
    const double x = a0 + (static_cast<double>(a1) - a0) * rng.uniform01_double();
    const double y = b0 + (static_cast<double>(b1) - b0) * rng.uniform01_double();
    const float c = rng.uniform(-5, 5);
    if (!(a + b).contains(x + y)) ++escapes;
    if (!(a - b).contains(x - y)) ++escapes;
    if (!(a * b).contains(x * y)) ++escapes;
    if (!(a * c).contains(x * c)) ++escapes;
    if (!relu(a).contains(std::max(x, 0.0))) ++escapes;
    // Exact endpoint results must be inside too.
    if (!(a + b).contains(static_cast<double>(a0) + b0)) ++escapes;
    if (!(a * b).contains(static_cast<double>(a1) * b1)) ++escapes;
  }
  EXPECT_EQ(escapes, 0U);
}

TEST(Interval, OutwardContainsInwardRoundedDoubleResult) {
  Rng rng(12);
  for (int t = 0; t < 100'000; ++t) {
    const float a0 = rng.uniform(-1, 1);
    const float a1 = a0 + rng.uniform(0, 1);
    const float c = rng.uniform(-3, 3);
    const double lo = std::min(static_cast<double>(a0) * c, static_cast<double>(a1) * c);
    const double hi = std::max(static_cast<double>(a0) * c, static_cast<double>(a1) * c);
    // Round inward: the float nearest the exact endpoint, moved toward the interior.
    float ilo = static_cast<float>(lo);
    if (ilo < lo) ilo = std::nextafter(ilo, std::numeric_limits<float>::infinity());
    float ihi = static_cast<float>(hi);
    if (ihi > hi) ihi = std::nextafter(ihi, -std::numeric_limits<float>::infinity());
    if (ilo > ihi) continue;
    ASSERT_TRUE((Interval(a0, a1) * c).contains(Interval(ilo, ihi)));
  }
}

TEST(Tensor, RejectsNonFinite) {
  EXPECT_THROW(Vec32({1.0F, std::numeric_limits<float>::infinity()}), std::invalid_argument);
  EXPECT_THROW(Mat32(1, 2, std::vector<float>{1.0F, std::nanf("")}), std::invalid_argument);
  EXPECT_THROW(Mat32(2, 2, std::vector<float>{1.0F}), DimensionError);
}

TEST(Tensor, IdentityMatvec) {
  const Vec32 v{1.5F, -2.0F, 0.25F};
  EXPECT_EQ(matvec(Mat32::identity(3), v), v);
  const std::vector<Interval> iv{Interval(0, 1), Interval(-2, -1), Interval(3, 3)};
  const auto out = matvec_interval(Mat32::identity(3), iv);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(out[i].contains(iv[i]));
}

TEST(Tensor, IntervalMatvecHandExample) {
  const Mat32 m(1, 2, std::vector<float>{2.0F, -1.0F});
  const std::vector<Interval> v{Interval(0, 1), Interval(0, 1)};
  const auto out = matvec_interval(m, v);
  ASSERT_EQ(out.size(), 1U);
  EXPECT_TRUE(out[0].contains(Interval(-1, 2)));
  EXPECT_LT(out[0].width(), 3.0001F);
}

TEST(Tensor, ShapeMismatchThrows) {
  const Mat32 m(2, 3);
  EXPECT_THROW(matvec(m, Vec32(2)), DimensionError);
  const std::vector<Interval> v(4, Interval(0, 1));
  EXPECT_THROW(matvec_interval(m, v), DimensionError);
}

TEST(Tensor, RandomEightByEightSamplingContainment) {
  Rng rng(5);
  std::vector<float> w(64);
  for (auto& x : w) x = rng.uniform(-2, 2);
  const Mat32 m(8, 8, w);
  std::vector<Interval> box;
  for (int i = 0; i < 8; ++i) {
    const float lo = rng.uniform(-1, 1);
    box.emplace_back(lo, lo + rng.uniform(0, 1));
  }
  const auto out = matvec_interval(m, box);
  for (int t = 0; t < 10'000; ++t) {
    Vec32 x(8);
    for (std::size_t i = 0; i < 8; ++i) x[i] = rng.uniform(box[i].lo(), box[i].hi());
    const auto y = matvec(m, x);
    for (std::size_t r = 0; r < 8; ++r) {
      // Reference in double; the float result is a rounding of it.
      double exact = 0;
      for (std::size_t c = 0; c < 8; ++c) exact += static_cast<double>(m(r, c)) * x[c];
      ASSERT_TRUE(out[r].contains(exact));
      ASSERT_TRUE(out[r].contains(static_cast<double>(y[r])));
    }
  }
}

TEST(Tensor, DotAccumulatesInDouble) {
  // 1 + 1e8 - 1e8 loses the 1 in float but not in double.
  const std::vector<float> a{1.0F, 1e8F, -1e8F};
  const std::vector<float> b{1.0F, 1.0F, 1.0F};
  EXPECT_EQ(mixtrain::numerics::dot(a, b), 1.0);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  Rng c(43);
  Rng d(42);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += c.next_u64() == d.next_u64();
  EXPECT_LT(same, 2);
}

TEST(Rng, PinnedFirstOutputs) {
  // mt19937_64 default-seed check value from the C++ standard.
  std::mt19937_64 ref(5489);
  for (int i = 0; i < 9999; ++i) ref();
  EXPECT_EQ(ref(), 9981545732273789042ULL);
  Rng r(5489);
  for (int i = 0; i < 9999; ++i) r.next_u64();
  EXPECT_EQ(r.next_u64(), 9981545732273789042ULL);
}

TEST(Rng, DerivedStreamsDifferAndRepeat) {
  auto a = Rng::derive(7, 0);
  auto b = Rng::derive(7, 1);
  auto a2 = Rng::derive(7, 0);
  EXPECT_NE(a.next_u64(), b.next_u64());
  a = Rng::derive(7, 0);
  EXPECT_EQ(a.next_u64(), a2.next_u64());
}

TEST(Rng, UniformStaysInRange) {
  Rng r(3);
  for (int i = 0; i < 100'000; ++i) {
    const float v = r.uniform(-0.5F, 0.25F);
    ASSERT_GE(v, -0.5F);
    ASSERT_LE(v, 0.25F);
  }
}

TEST(Rng, SampleWithoutReplacementIsDistinct) {
  Rng r(9);
  auto s = r.sample_without_replacement(100, 30);
  ASSERT_EQ(s.size(), 30U);
  std::sort(s.begin(), s.end());
  EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
  EXPECT_LT(s.back(), 100U);
}

}  // namespace
