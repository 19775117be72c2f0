#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mixtrain/data/dataset.hpp"
#include "mixtrain/model/serialize.hpp"

namespace mixtrain::data {

// Big-endian IDX files: u32 magic (0x00000803 images / 0x00000801 labels),
// u32 dims, then unsigned bytes.
inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

namespace detail {
inline std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t pos) {
  if (b.size() < pos + 4) throw model::FormatError("idx: truncated header");
  return (std::uint32_t{b[pos]} << 24) | (std::uint32_t{b[pos + 1]} << 16) |
         (std::uint32_t{b[pos + 2]} << 8) | std::uint32_t{b[pos + 3]};
}

inline void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<unsigned char>(v >> s));
}
}  // namespace detail

// Images scaled to [0, 1]; labels as given. Throws FormatError on bad magic,
// truncation or a count mismatch.
inline Dataset parse_idx(const std::vector<unsigned char>& images,
                         const std::vector<unsigned char>& labels) {
  if (detail::read_be32(images, 0) != kIdxImageMagic) throw model::FormatError("idx: bad image magic");
  if (detail::read_be32(labels, 0) != kIdxLabelMagic) throw model::FormatError("idx: bad label magic");
  const std::uint32_t count = detail::read_be32(images, 4);
  const std::uint32_t rows = detail::read_be32(images, 8);
  const std::uint32_t cols = detail::read_be32(images, 12);
  const std::uint32_t label_count = detail::read_be32(labels, 4);
  if (count != label_count) {
    throw model::FormatError("idx: " + std::to_string(count) + " images but " +
                             std::to_string(label_count) + " labels");
  }
  const std::size_t pixels = std::size_t{rows} * cols;
  if (images.size() < 16 + std::size_t{count} * pixels) throw model::FormatError("idx: image data truncated");
  if (labels.size() < 8 + std::size_t{count}) throw model::FormatError("idx: label data truncated");

  Dataset ds;
  ds.samples.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    std::vector<float> x(pixels);
    const unsigned char* px = images.data() + 16 + n * pixels;
    for (std::size_t i = 0; i < pixels; ++i) x[i] = static_cast<float>(px[i]) / 255.0F;
    const std::size_t y = labels[8 + n];
    ds.num_classes = std::max(ds.num_classes, y + 1);
    ds.samples.push_back({Vec32(std::move(x)), y});
  }
  return ds;
}

inline Dataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
  auto ds = parse_idx(model::read_bytes(images_path), model::read_bytes(labels_path));
  ds.provenance = "idx:" + images_path.filename().string();
  return ds;
}

// Writes raw [0, 1] features as IDX bytes (values rounded to 0..255).
inline std::pair<std::vector<unsigned char>, std::vector<unsigned char>> encode_idx(
    const Dataset& ds, std::uint32_t rows, std::uint32_t cols) {
  if (std::size_t{rows} * cols != ds.dim()) throw numerics::DimensionError("encode_idx: shape mismatch");
  const Dataset raw = denormalize(ds);
  std::vector<unsigned char> img;
  std::vector<unsigned char> lab;
  detail::put_be32(img, kIdxImageMagic);
  detail::put_be32(img, static_cast<std::uint32_t>(ds.size()));
  detail::put_be32(img, rows);
  detail::put_be32(img, cols);
  detail::put_be32(lab, kIdxLabelMagic);
  detail::put_be32(lab, static_cast<std::uint32_t>(ds.size()));
  for (const auto& s : raw.samples) {
    for (float v : s.x) {
      const float c = std::clamp(v, 0.0F, 1.0F) * 255.0F;
      img.push_back(static_cast<unsigned char>(std::lround(c)));
    }
    lab.push_back(static_cast<unsigned char>(s.y));
  }
  return {std::move(img), std::move(lab)};
}

inline void write_idx(const Dataset& ds, std::uint32_t rows, std::uint32_t cols,
                      const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path) {
  const auto [img, lab] = encode_idx(ds, rows, cols);
  for (const auto& [bytes, path] : {std::pair{&img, images_path}, std::pair{&lab, labels_path}}) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw model::IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes->data()), static_cast<std::streamsize>(bytes->size()));
  }
}

}  // namespace mixtrain::data
