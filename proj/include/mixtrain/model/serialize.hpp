#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixtrain/model/network.hpp"

namespace mixtrain::model {

// Model file layout (all little-endian):
//   "VRNN" | u32 version = 1 | u32 layer_count |
//   per layer: u32 rows | u32 cols | rows*cols f32 weights (row-major) | rows f32 biases

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<char, 4> kModelMagic{'V', 'R', 'N', 'N'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {
inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void put_f32(std::vector<unsigned char>& out, float f) {
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("model file truncated");
  }

  [[nodiscard]] bool at_end() const noexcept { return pos_ == bytes_.size(); }
  [[nodiscard]] std::size_t pos() const noexcept { return pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};
}  // namespace detail

inline std::vector<unsigned char> encode(const Network& net) {
  std::vector<unsigned char> out(kModelMagic.begin(), kModelMagic.end());
  detail::put_u32(out, kModelVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(net.depth()));
  for (const auto& l : net.layers()) {
    detail::put_u32(out, static_cast<std::uint32_t>(l.weight.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(l.weight.cols()));
    for (float w : l.weight.span()) detail::put_f32(out, w);
    for (float b : l.bias) detail::put_f32(out, b);
  }
  return out;
}

inline Network decode(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic.data(), 4) != 0) {
    throw FormatError("bad magic: not a VRNN model file");
  }
  detail::ByteReader in(bytes);
  (void)in.u32();
  if (const auto version = in.u32(); version != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32();
  if (count == 0) throw FormatError("model has no layers");
  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
    in.need(static_cast<std::size_t>((n + rows) * 4));
    std::vector<float> w(n);
    for (auto& v : w) v = in.f32();
    std::vector<float> b(rows);
    for (auto& v : b) v = in.f32();
    try {
      layers.push_back({Mat32(rows, cols, std::move(w)), Vec32(std::move(b))});
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("layer ") + std::to_string(i) + ": " + e.what());
    }
  }
  if (!in.at_end()) throw FormatError("trailing bytes after last layer");
  try {
    return Network(std::move(layers));
  } catch (const DimensionError& e) {
    throw FormatError(std::string("shape chain violation: ") + e.what());
  }
}

inline void save(const Network& net, const std::filesystem::path& path) {
  const auto bytes = encode(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Network load(const std::filesystem::path& path) { return decode(read_bytes(path)); }

}  // namespace mixtrain::model
