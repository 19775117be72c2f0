#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "mixtrain/attack/attack.hpp"

namespace mixtrain::train {

enum class Scheme { regular, adversarial, verifiable, mixtrain };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::regular: return "regular";
    case Scheme::adversarial: return "adv";
    case Scheme::verifiable: return "verifiable";
    case Scheme::mixtrain: return "mixtrain";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "regular") return Scheme::regular;
  if (s == "adv" || s == "adversarial") return Scheme::adversarial;
  if (s == "verifiable") return Scheme::verifiable;
  if (s == "mixtrain") return Scheme::mixtrain;
  throw std::invalid_argument("unknown scheme: " + s);
}

enum class OptimizerKind { sgd, adam };

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer: " + s);
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  double decay = 0.6;           // lr multiplier applied every `decay_every` epochs
  std::size_t decay_every = 5;  // 0 disables decay
  double momentum = 0.0;        // sgd only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  static OptimizerConfig adam_preset() { return {}; }
  static OptimizerConfig sgd_preset() {
    OptimizerConfig c;
    c.kind = OptimizerKind::sgd;
    c.lr = 0.05;
    return c;
  }

  [[nodiscard]] double lr_at(std::size_t epoch) const {
    if (decay_every == 0) return lr;
    return lr * std::pow(decay, static_cast<double>(epoch / decay_every));
  }
};

// Default alpha0 by dataset difficulty: datasets that train to high accuracy
// easily spend more weight on the robust term.
inline constexpr double kAlpha0Easy = 0.8;
inline constexpr double kAlpha0Hard = 0.5;

struct TrainConfig {
  Scheme scheme = Scheme::mixtrain;
  std::size_t epochs = 20;
  std::size_t batch_size = 50;
  OptimizerConfig optimizer;
  float epsilon = 0.1F;         // target radius, raw [0, 1] units
  float epsilon_start = 0.01F;  // warm-up start
  std::size_t warmup_epochs = 10;
  std::optional<std::size_t> k;  // robust samples per epoch; unset means one per batch
  double alpha0 = kAlpha0Easy;
  double acc_target = 0.9;
  std::uint64_t seed = 0;
  attack::AttackConfig attack;  // perturbation for adversarial training

  // k' = round(k / (n / m)) robust samples per batch.
  [[nodiscard]] std::size_t raw_k_prime(std::size_t n) const {
    if (!k) return 1;
    const double batches = static_cast<double>(n) / static_cast<double>(batch_size);
    return static_cast<std::size_t>(std::llround(static_cast<double>(*k) / batches));
  }

  // Zero after rounding is promoted to one.
  [[nodiscard]] std::size_t k_prime(std::size_t n) const {
    return std::max<std::size_t>(raw_k_prime(n), 1);
  }

  // Radius in effect during `epoch`: linear from min(start, target) at epoch 0
  // to the target at epoch warmup_epochs - 1, constant afterwards.
  [[nodiscard]] float epsilon_at(std::size_t epoch) const {
    if (warmup_epochs <= 1 || epoch + 1 >= warmup_epochs) return epsilon;
    const double start = std::min(epsilon_start, epsilon);
    const double t = static_cast<double>(epoch) / static_cast<double>(warmup_epochs - 1);
    const auto e = static_cast<float>(start + (static_cast<double>(epsilon) - start) * t);
    return std::min(e, epsilon);
  }

  void validate(std::size_t n) const {
    if (batch_size < 1 || batch_size > n) {
      throw std::invalid_argument("train: batch size must be in [1, n]");
    }
    if (!(epsilon >= 0.0F)) throw std::invalid_argument("train: epsilon must be >= 0");
    if (!(epsilon_start >= 0.0F)) throw std::invalid_argument("train: epsilon start must be >= 0");
    if (!(optimizer.lr > 0.0)) throw std::invalid_argument("train: learning rate must be > 0");
    if (!(alpha0 >= 0.0 && alpha0 <= 1.0)) throw std::invalid_argument("train: alpha0 must be in [0, 1]");
    if (scheme == Scheme::mixtrain && k && *k == 0) {
      throw std::invalid_argument("train: mixtrain needs k >= 1");
    }
    if (scheme == Scheme::adversarial && attack.kind != attack::AttackKind::pgd) {
      throw std::invalid_argument("train: adversarial training uses PGD");
    }
  }
};

// Per-epoch feedback on the mixing weight: +step when the sampled accuracy
// beats the target, -step otherwise, clamped to [0, 1].
class MixSchedule {
 public:
  static constexpr double kStep = 0.05;

  MixSchedule(double alpha0, double acc_target)
      : alpha_(std::clamp(alpha0, 0.0, 1.0)), alpha0_(alpha_), acc_target_(acc_target) {}

  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] double alpha0() const noexcept { return alpha0_; }
  [[nodiscard]] double acc_target() const noexcept { return acc_target_; }

  double update(double acc) {
    alpha_ = std::clamp(acc > acc_target_ ? alpha_ + kStep : alpha_ - kStep, 0.0, 1.0);
    return alpha_;
  }

 private:
  double alpha_;
  double alpha0_;
  double acc_target_;
};

}  // namespace mixtrain::train
