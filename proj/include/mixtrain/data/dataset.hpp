#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mixtrain/analysis/box.hpp"
#include "mixtrain/model/serialize.hpp"
#include "mixtrain/numerics/tensor.hpp"

namespace mixtrain::data {

using numerics::Vec32;

struct Sample {
  Vec32 x;
  std::size_t y = 0;
};

// Per-feature affine normalization x' = (x - mean) / stddev applied to raw
// features in [0, 1]. Empty vectors mean "not normalized".
struct Normalization {
  std::vector<float> mean;
  std::vector<float> stddev;

  [[nodiscard]] bool identity() const noexcept { return mean.empty(); }
};

struct Dataset {
  std::vector<Sample> samples;
  Normalization norm;
  std::size_t num_classes = 0;
  std::string provenance;

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
  [[nodiscard]] std::size_t dim() const noexcept {
    return samples.empty() ? 0 : samples.front().x.size();
  }

  // Valid inputs in the current coordinates. Raw features live in [0, 1];
  // an L-inf radius eps in raw units becomes eps / stddev_i.
  [[nodiscard]] analysis::InputDomain domain() const {
    const std::size_t n = dim();
    if (norm.identity()) return analysis::InputDomain::unit(n);
    analysis::InputDomain dom;
    dom.lo.resize(n);
    dom.hi.resize(n);
    dom.radius_scale.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = norm.mean[i];
      const double s = norm.stddev[i];
      dom.lo[i] = static_cast<float>((0.0 - m) / s);
      dom.hi[i] = static_cast<float>((1.0 - m) / s);
      dom.radius_scale[i] = static_cast<float>(1.0 / s);
    }
    return dom;
  }

  [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.norm = norm;
    out.num_classes = num_classes;
    out.provenance = provenance;
    out.samples.reserve(indices.size());
    for (std::size_t i : indices) out.samples.push_back(samples.at(i));
    return out;
  }

  [[nodiscard]] Dataset slice(std::size_t begin, std::size_t count) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = begin; i < std::min(size(), begin + count); ++i) idx.push_back(i);
    return subset(idx);
  }

  void validate() const {
    for (const auto& s : samples) {
      if (s.x.size() != dim()) throw std::invalid_argument("Dataset: ragged feature vectors");
      if (s.y >= num_classes) throw std::invalid_argument("Dataset: label out of range");
    }
  }
};

// Broadcasts a per-channel mean/stddev to every feature.
inline Normalization broadcast_normalization(std::size_t dim, float mean, float stddev) {
  return {std::vector<float>(dim, mean), std::vector<float>(dim, stddev)};
}

// Normalizes a raw dataset. Fails if the dataset is already normalized or a
// stddev is not positive.
inline Dataset normalize(const Dataset& raw, const Normalization& norm) {
  if (!raw.norm.identity()) throw std::invalid_argument("normalize: dataset already normalized");
  const std::size_t n = raw.dim();
  if (norm.mean.size() != n || norm.stddev.size() != n) {
    throw numerics::DimensionError("normalize: normalization has wrong length");
  }
  for (float s : norm.stddev) {
    if (!(s > 0.0F)) throw std::invalid_argument("normalize: stddev must be > 0");
  }
  Dataset out = raw;
  out.norm = norm;
  for (auto& s : out.samples) {
    for (std::size_t i = 0; i < n; ++i) s.x[i] = (s.x[i] - norm.mean[i]) / norm.stddev[i];
  }
  return out;
}

inline Dataset denormalize(const Dataset& ds) {
  if (ds.norm.identity()) return ds;
  Dataset out = ds;
  out.norm = {};
  for (auto& s : out.samples) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      s.x[i] = s.x[i] * ds.norm.stddev[i] + ds.norm.mean[i];
    }
  }
  return out;
}

// MNIST-style preset: inputs scaled to [0, 1], mean 0.5, unit stddev.
inline Normalization mnist_normalization(std::size_t dim) {
  return broadcast_normalization(dim, 0.5F, 1.0F);
}

// CSV with header x0,...,x{d-1},label. Values are written in the current
// coordinates with round-trip precision.
inline void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw model::IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < ds.dim(); ++i) out << 'x' << i << ',';
  out << "label\n";
  out.precision(9);
  for (const auto& s : ds.samples) {
    for (float v : s.x) out << v << ',';
    out << s.y << '\n';
  }
  if (!out) throw model::IoError("write failed: " + path.string());
}

inline Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw model::IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw model::FormatError("csv: missing header");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2) throw model::FormatError("csv: need at least one feature and a label");
  Dataset ds;
  ds.provenance = "csv:" + path.string();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<float> x;
    std::size_t label = 0;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        if (col + 1 < columns) {
          x.push_back(std::stof(cell));
        } else {
          label = static_cast<std::size_t>(std::stoul(cell));
        }
      } catch (const std::exception&) {
        throw model::FormatError("csv: bad value '" + cell + "'");
      }
      ++col;
    }
    if (col != columns) throw model::FormatError("csv: row has wrong number of columns");
    ds.num_classes = std::max(ds.num_classes, label + 1);
    ds.samples.push_back({Vec32(std::move(x)), label});
  }
  return ds;
}

}  // namespace mixtrain::data
