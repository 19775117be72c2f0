#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "mixtrain/model/gradients.hpp"
#include "mixtrain/model/loss.hpp"
#include "mixtrain/model/network.hpp"
#include "mixtrain/model/serialize.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace {

using namespace mixtrain;
using fixtures::make_layer;
using model::ContractViolation;
using model::DimensionError;
using model::Network;
using numerics::Rng;

std::filesystem::path tmp_path(const std::string& name) {
  std::filesystem::create_directories(MIXTRAIN_TEST_TMP);
  return std::filesystem::path(MIXTRAIN_TEST_TMP) / name;
}

TEST(Forward, ZeroWeightsGiveBiases) {
  const Network net({make_layer(3, 2, std::vector<float>(6, 0.0F), {0.1F, -0.2F, 0.3F}),
                     make_layer(2, 3, std::vector<float>(6, 0.0F), {1.5F, -2.5F})});
  const std::vector<float> x{0.7F, 0.2F};
  const auto out = model::forward(net, x);
  EXPECT_EQ(out, (std::vector<float>{1.5F, -2.5F}));
}

TEST(Forward, SingleInputLinear) {
  const Network net({make_layer(2, 1, {2.0F, 0.0F}, {0.0F, 0.0F})});
  const std::vector<float> x{1.0F};
  EXPECT_EQ(model::forward(net, x)[0], 2.0F);
}

TEST(Forward, DimensionMismatchThrows) {
  const Network net({make_layer(2, 3, std::vector<float>(6, 1.0F), {0, 0})});
  const std::vector<float> x{1.0F, 2.0F};
  EXPECT_THROW(model::forward(net, x), DimensionError);
}

TEST(Network, RejectsBrokenShapeChain) {
  EXPECT_THROW(Network({make_layer(3, 2, std::vector<float>(6), {0, 0, 0}),
                        make_layer(2, 4, std::vector<float>(8), {0, 0})}),
               DimensionError);
  EXPECT_THROW(Network({make_layer(1, 2, {1, 1}, {0})}), DimensionError);
}

TEST(Forward, MatchesIndependentRecompute784) {
  Rng rng(1);
  const auto net = fixtures::random_net({784, 64, 10}, rng);
  for (int t = 0; t < 5; ++t) {
    const auto x = fixtures::random_point(784, rng);
    const auto got = model::forward(net, x);
    const auto ref = oracles::reference_forward(net, x);
    for (std::size_t j = 0; j < got.size(); ++j) {
      EXPECT_NEAR(got[j], ref[j], 1e-5 * (1.0 + std::abs(ref[j])));
    }
    // Bit-identical on repeat.
    EXPECT_EQ(model::forward(net, x), got);
  }
}

TEST(CrossEntropy, UniformLogitsGiveLogK) {
  for (std::size_t k : {2U, 3U, 10U}) {
    const std::vector<double> z(k, 0.37);
    EXPECT_NEAR(model::cross_entropy(z, 1), std::log(static_cast<double>(k)), 1e-12);
  }
}

TEST(CrossEntropy, LargeMarginIsNearZero) {
  const std::vector<float> z{20.0F, 0.0F, 0.0F};
  EXPECT_LT(model::cross_entropy(z, 0), 1e-3F);
  EXPECT_GE(model::cross_entropy(z, 0), 0.0F);
}

TEST(CrossEntropy, StableForHugeLogits) {
  const std::vector<float> z{1e30F, -1e30F};
  EXPECT_TRUE(std::isfinite(model::cross_entropy(z, 1)));
  EXPECT_EQ(model::cross_entropy(z, 0), 0.0F);
}

TEST(CrossEntropy, MatchesLongDoubleRecompute) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z(7);
    for (auto& v : z) v = rng.uniform_double(-8, 8);
    const auto y = static_cast<std::size_t>(rng.below(7));
    long double s = 0;
    for (double v : z) s += std::exp(static_cast<long double>(v));
    const long double ref = std::log(s) - z[y];
    EXPECT_NEAR(model::cross_entropy(z, y), static_cast<double>(ref), 1e-12);
    const auto g = model::cross_entropy_grad(z, y);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const long double p = std::exp(static_cast<long double>(z[j])) / s;
      EXPECT_NEAR(g[j], static_cast<double>(p - (j == y ? 1 : 0)), 1e-12);
    }
  }
}

TEST(Backward, LinearNetInputGradientClosedForm) {
  Rng rng(3);
  const auto net = fixtures::random_net({3, 4}, rng);
  const std::vector<float> x{0.2F, -0.4F, 0.9F};
  auto tape = model::forward_tape<double>(net, x);
  const auto dz = model::cross_entropy_grad(tape.logits(), 2);
  const auto g = model::backward<double>(net, tape, dz);
  const auto& w = net.layer(0).weight;
  for (std::size_t i = 0; i < 3; ++i) {
    double ref = 0;
    for (std::size_t j = 0; j < 4; ++j) ref += w(j, i) * dz[j];
    EXPECT_NEAR(g.input[i], ref, 1e-12);
  }
}

TEST(Backward, SymmetricNetHasZeroInputGradientAtTiedLogits) {
  // Both logits share one weight row: they tie everywhere, so the softmax
  // error vector sums to zero against identical rows.
  const Network net({make_layer(2, 2, {0.5F, -1.0F, 2.0F, 0.25F}, {0.1F, -0.1F}),
                     make_layer(2, 2, {1.0F, 3.0F, 1.0F, 3.0F}, {0.2F, 0.2F})});
  const std::vector<float> x{0.3F, 0.8F};
  auto tape = model::forward_tape<double>(net, x);
  ASSERT_EQ(tape.logits()[0], tape.logits()[1]);
  const auto g = model::backward<double>(net, tape, model::cross_entropy_grad(tape.logits(), 0));
  EXPECT_EQ(g.input[0], 0.0);
  EXPECT_EQ(g.input[1], 0.0);
}

TEST(Backward, TapeReuseIsContractViolation) {
  Rng rng(4);
  const auto net = fixtures::random_net({2, 3, 2}, rng);
  const std::vector<float> x{0.1F, 0.2F};
  auto tape = model::forward_tape<float>(net, x);
  const auto dz = model::cross_entropy_grad(tape.logits(), 0);
  EXPECT_NO_THROW(model::backward<float>(net, tape, dz));
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(model::backward<float>(net, tape, dz), ContractViolation);
}

// Central differences on the 64-bit loss; probes whose +-h perturbation
// flips any ReLU are redrawn since the loss has a kink there.
template <typename Real>
double worst_relative_error(double limit, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t sizes[] = {6, 8, 8, 4};
  double worst = 0.0;
  int probes = 0;
  int attempts = 0;
  while (probes < 150 && attempts < 5000) {
    ++attempts;
    const auto net = fixtures::random_net(sizes, rng, 0.3F);
    const auto x = fixtures::random_point(6, rng, -1, 1);
    const auto y = static_cast<std::size_t>(rng.below(4));
    auto tape = model::forward_tape<Real>(net, x);
    const auto g = model::backward<Real>(net, tape, model::cross_entropy_grad(tape.logits(), y));

    const bool on_input = rng.below(4) == 0;
    const std::size_t li = rng.below(net.depth());
    const std::size_t count = on_input ? 6 : net.layer(li).weight.rows() * net.layer(li).weight.cols();
    const std::size_t idx = rng.below(count);
    const float h = 1e-3F;

    auto loss_at = [&](float delta, std::vector<bool>* pattern) {
      Network n2 = net;
      auto x2 = x;
      if (on_input) {
        x2[idx] += delta;
      } else {
        n2.mutable_layer(li).weight.data()[idx] += delta;
      }
      if (pattern) *pattern = oracles::relu_pattern(n2, x2);
      return model::cross_entropy(model::evaluate<double>(n2, x2), y);
    };
    std::vector<bool> p_plus;
    std::vector<bool> p_minus;
    const double lp = loss_at(h, &p_plus);
    const double lm = loss_at(-h, &p_minus);
    if (p_plus != p_minus || p_plus != oracles::relu_pattern(net, x)) continue;
    const double fd = (lp - lm) / (2.0 * h);
    const double an = on_input ? static_cast<double>(g.input[idx])
                               : static_cast<double>(g.layers[li].weight[idx]);
    worst = std::max(worst, oracles::relative_error(an, fd));
    ++probes;
  }
  EXPECT_GE(probes, 100);
  EXPECT_LT(worst, limit);
  return worst;
}

TEST(Backward, FiniteDifferences32Bit) { worst_relative_error<float>(1e-3, 21); }

TEST(Backward, FiniteDifferences64Bit) { worst_relative_error<double>(1e-4, 22); }

TEST(Backward, BiasGradientEqualsDelta) {
  Rng rng(6);
  const auto net = fixtures::random_net({3, 5, 3}, rng);
  const std::vector<float> x{0.5F, 0.1F, 0.9F};
  auto tape = model::forward_tape<double>(net, x);
  const auto dz = model::cross_entropy_grad(tape.logits(), 1);
  const auto g = model::backward<double>(net, tape, dz);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(g.layers[1].bias[j], dz[j]);
}

TEST(Serialize, RoundtripIsBitIdentical) {
  Rng rng(7);
  const auto net = fixtures::random_net({5, 7, 3}, rng);
  const auto path = tmp_path("roundtrip.vrnn");
  model::save(net, path);
  const auto back = model::load(path);
  EXPECT_TRUE(back == net);
  EXPECT_EQ(model::encode(back), model::encode(net));
}

TEST(Serialize, CorruptedMagicIsFormatError) {
  Rng rng(8);
  auto bytes = model::encode(fixtures::random_net({2, 2}, rng));
  bytes[0] = 'X';
  EXPECT_THROW(model::decode(bytes), model::FormatError);
}

TEST(Serialize, TruncationAndTrailingBytesAreFormatErrors) {
  Rng rng(9);
  const auto good = model::encode(fixtures::random_net({3, 4, 2}, rng));
  for (std::size_t cut : {std::size_t{6}, std::size_t{13}, good.size() - 1}) {
    std::vector<unsigned char> bad(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(model::decode(bad), model::FormatError) << "cut at " << cut;
  }
  auto longer = good;
  longer.push_back(0);
  EXPECT_THROW(model::decode(longer), model::FormatError);
  auto version = good;
  version[4] = 2;
  EXPECT_THROW(model::decode(version), model::FormatError);
}

TEST(Serialize, ShapeChainViolationIsFormatError) {
  // Two layers, 2x2 then 2x3: the second expects 3 inputs.
  std::vector<unsigned char> b{'V', 'R', 'N', 'N'};
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
  };
  auto f32 = [&](float f) {
    std::uint32_t v = 0;
    std::memcpy(&v, &f, 4);
    u32(v);
  };
  u32(1);
  u32(2);
  u32(2);
  u32(2);
  for (int i = 0; i < 6; ++i) f32(0.0F);
  u32(2);
  u32(3);
  for (int i = 0; i < 8; ++i) f32(0.0F);
  EXPECT_THROW(model::decode(b), model::FormatError);
}

TEST(Serialize, HandEncodedTwoTwoTwoNet) {
  std::vector<unsigned char> b;
  auto u32 = [&](std::uint32_t v) {
    b.push_back(static_cast<unsigned char>(v & 0xFF));
    b.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
    b.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
    b.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
  };
  auto f32 = [&](float f) {
    std::uint32_t v = 0;
    std::memcpy(&v, &f, 4);
    u32(v);
  };
  b.insert(b.end(), {'V', 'R', 'N', 'N'});
  u32(1);  // version
  u32(2);  // layers
  u32(2);
  u32(2);
  for (float w : {1.0F, 2.0F, 3.0F, 4.0F}) f32(w);
  for (float w : {0.5F, -0.5F}) f32(w);
  u32(2);
  u32(2);
  for (float w : {-1.0F, 0.25F, 8.0F, 0.0F}) f32(w);
  for (float w : {0.0F, 1.0F}) f32(w);

  const auto path = tmp_path("hand.vrnn");
  {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  }
  const auto net = model::load(path);
  ASSERT_EQ(net.sizes(), (std::vector<std::size_t>{2, 2, 2}));
  EXPECT_EQ(net.layer(0).weight(0, 1), 2.0F);
  EXPECT_EQ(net.layer(0).weight(1, 0), 3.0F);
  EXPECT_EQ(net.layer(0).bias[1], -0.5F);
  EXPECT_EQ(net.layer(1).weight(1, 0), 8.0F);
  EXPECT_EQ(net.layer(1).bias[1], 1.0F);
  // x = (1, 1): hidden = relu(3.5, 6.5); logits = (-3.5 + 1.625, 28 + 1).
  const std::vector<float> x{1.0F, 1.0F};
  const auto z = model::forward(net, x);
  EXPECT_FLOAT_EQ(z[0], -1.875F);
  EXPECT_FLOAT_EQ(z[1], 29.0F);
  EXPECT_EQ(model::encode(net), b);
}

TEST(Serialize, MissingFileIsIoError) {
  EXPECT_THROW(model::load(tmp_path("does-not-exist.vrnn")), model::IoError);
}

TEST(Kaiming, BoundsAndDeterminism) {
  Rng a(10);
  Rng b(10);
  const std::size_t sizes[] = {16, 8, 2};
  const auto n1 = Network::kaiming(sizes, a);
  const auto n2 = Network::kaiming(sizes, b);
  EXPECT_TRUE(n1 == n2);
  const float bound = std::sqrt(6.0F / 16.0F);
  for (float w : n1.layer(0).weight.span()) {
    EXPECT_LE(std::abs(w), bound);
  }
  for (float v : n1.layer(1).bias) EXPECT_EQ(v, 0.0F);
}

}  // namespace
