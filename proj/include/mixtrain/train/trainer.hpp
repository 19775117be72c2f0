#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixtrain/analysis/box.hpp"
#include "mixtrain/analysis/robust_loss.hpp"
#include "mixtrain/attack/attack.hpp"
#include "mixtrain/data/dataset.hpp"
#include "mixtrain/model/gradients.hpp"
#include "mixtrain/model/loss.hpp"
#include "mixtrain/model/network.hpp"
#include "mixtrain/model/serialize.hpp"
#include "mixtrain/numerics/rng.hpp"
#include "mixtrain/train/config.hpp"
#include "mixtrain/train/optimizer.hpp"

namespace mixtrain::train {

using model::Network;

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochReport {
  std::size_t epoch = 0;
  float epsilon = 0.0F;
  double alpha = 0.0;  // weight of the robust term during this epoch
  double regular_loss = 0.0;
  std::optional<double> robust_loss;
  double mixed_loss = 0.0;
  double sampled_accuracy = 0.0;
  double batch_millis = 0.0;  // mean wall time per batch
};

// Component losses of one batch, kept separate so the mixed loss can be
// checked against its definition.
struct BatchLosses {
  double regular = 0.0;
  std::optional<double> robust;
  double alpha = 0.0;
  double mixed = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<EpochReport> epochs;
  std::size_t k_prime = 0;
  bool k_prime_promoted = false;  // rounding gave 0 and it was raised to 1
};

using EpochCallback = std::function<void(const EpochReport&)>;

// Separate random streams so one consumer cannot shift another.
inline constexpr std::uint64_t kInitStream = 0;
inline constexpr std::uint64_t kShuffleStream = 1;
inline constexpr std::uint64_t kSampleStream = 2;
inline constexpr std::uint64_t kAttackStream = 3;

inline Network initial_network(std::span<const std::size_t> sizes, std::uint64_t seed) {
  auto rng = numerics::Rng::derive(seed, kInitStream);
  return Network::kaiming(sizes, rng);
}

inline double accuracy(const Network& net, const data::Dataset& ds,
                       std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i : indices) hits += model::predicts(net, ds.samples[i].x.span(), ds.samples[i].y) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(indices.size());
}

inline double accuracy(const Network& net, const data::Dataset& ds) {
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return accuracy(net, ds, all);
}

namespace detail {

inline bool finite(const model::Gradients<double>& g) {
  for (const auto& l : g.layers) {
    for (double v : l.weight) if (!std::isfinite(v)) return false;
    for (double v : l.bias) if (!std::isfinite(v)) return false;
  }
  return true;
}

// Clean cross-entropy at x, accumulated into `sum`.
inline double add_regular(const Network& net, std::span<const float> x, std::size_t y,
                          model::Gradients<double>& sum) {
  auto tape = model::forward_tape<double>(net, x);
  const double loss = model::cross_entropy(tape.logits(), y);
  const auto dl = model::cross_entropy_grad(tape.logits(), y);
  sum.add_scaled(model::backward<double>(net, tape, dl), 1.0);
  return loss;
}

// Robust loss over B_eps(x); a zero radius is the clean loss.
inline double add_robust(const Network& net, std::span<const float> x, std::size_t y, float eps,
                         const analysis::InputDomain& domain, model::Gradients<double>& sum) {
  if (eps == 0.0F) return add_regular(net, x, y, sum);
  const auto box = analysis::Box::around(x, eps, domain);
  auto r = analysis::robust_loss(net, box, y, true);
  sum.add_scaled(r.grads, 1.0);
  return r.loss;
}

}  // namespace detail

// One optimizer step on a batch.
//   alpha == 0: clean term only; alpha == 1: robust term only.
// `robust_idx` are positions into `batch` (sorted) used by the robust term.
struct BatchContext {
  const data::Dataset* data = nullptr;
  analysis::InputDomain domain;
  Scheme scheme = Scheme::regular;
  float epsilon = 0.0F;
  const attack::AttackConfig* attack = nullptr;
  numerics::Rng* attack_rng = nullptr;
};

inline BatchLosses batch_step(Network& net, Optimizer& opt, std::size_t epoch,
                              const BatchContext& ctx, std::span<const std::size_t> batch,
                              std::span<const std::size_t> robust_idx, double alpha) {
  const auto& ds = *ctx.data;
  BatchLosses out;
  out.alpha = alpha;
  auto grad = model::Gradients<double>::zeros_like(net);

  if (alpha < 1.0) {
    auto sum = model::Gradients<double>::zeros_like(net);
    double loss = 0.0;
    for (std::size_t i : batch) {
      const auto& s = ds.samples[i];
      if (ctx.scheme == Scheme::adversarial) {
        auto cfg = *ctx.attack;
        cfg.epsilon = ctx.epsilon;
        const auto xp = attack::pgd_perturb(net, s.x.span(), s.y, cfg, ctx.domain, *ctx.attack_rng);
        loss += detail::add_regular(net, xp, s.y, sum);
      } else {
        loss += detail::add_regular(net, s.x.span(), s.y, sum);
      }
    }
    const auto m = static_cast<double>(batch.size());
    out.regular = loss / m;
    grad.add_scaled(sum, (1.0 - alpha) / m);
  }
  if (alpha > 0.0) {
    auto sum = model::Gradients<double>::zeros_like(net);
    double loss = 0.0;
    for (std::size_t p : robust_idx) {
      const auto& s = ds.samples[batch[p]];
      loss += detail::add_robust(net, s.x.span(), s.y, ctx.epsilon, ctx.domain, sum);
    }
    const auto k = static_cast<double>(robust_idx.size());
    out.robust = loss / k;
    grad.add_scaled(sum, alpha / k);
  }
  out.mixed = (1.0 - alpha) * out.regular + alpha * out.robust.value_or(0.0);
  if (!std::isfinite(out.mixed) || !detail::finite(grad)) {
    throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                          " (loss " + std::to_string(out.mixed) + ")");
  }
  opt.step(net, grad, epoch);
  return out;
}

// Shared loop behind all four schemes.
inline TrainResult train(Network net, const data::Dataset& data, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("train: empty dataset");
  cfg.validate(n);
  model::detail::check_input(net, data.dim());

  TrainResult res;
  res.k_prime = cfg.k_prime(n);
  res.k_prime_promoted = cfg.scheme == Scheme::mixtrain && cfg.raw_k_prime(n) == 0;

  Optimizer opt(cfg.optimizer, net);
  auto shuffle_rng = numerics::Rng::derive(cfg.seed, kShuffleStream);
  auto sample_rng = numerics::Rng::derive(cfg.seed, kSampleStream);
  auto attack_rng = numerics::Rng::derive(cfg.seed, kAttackStream);
  MixSchedule schedule(cfg.alpha0, cfg.acc_target);

  BatchContext ctx;
  ctx.data = &data;
  ctx.domain = data.domain();
  ctx.scheme = cfg.scheme;
  ctx.attack = &cfg.attack;
  ctx.attack_rng = &attack_rng;

  std::vector<std::size_t> order(n);
  std::vector<std::size_t> all_positions;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    ctx.epsilon = cfg.scheme == Scheme::regular ? 0.0F : cfg.epsilon_at(epoch);

    double alpha = 0.0;
    if (cfg.scheme == Scheme::verifiable) alpha = 1.0;
    if (cfg.scheme == Scheme::mixtrain) alpha = schedule.alpha();

    EpochReport rep;
    rep.epoch = epoch;
    rep.epsilon = ctx.epsilon;
    rep.alpha = alpha;
    double reg_sum = 0.0;
    double rob_sum = 0.0;
    double mixed_sum = 0.0;
    double millis = 0.0;
    std::size_t batches = 0;
    std::vector<std::size_t> sampled;  // dataset indices seen by the robust term

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, n - start);
      const std::span<const std::size_t> batch(order.data() + start, len);
      std::vector<std::size_t> robust_idx;
      if (cfg.scheme == Scheme::verifiable) {
        robust_idx.resize(len);
        std::iota(robust_idx.begin(), robust_idx.end(), std::size_t{0});
      } else if (cfg.scheme == Scheme::mixtrain) {
        robust_idx = sample_rng.sample_without_replacement(len, std::min(res.k_prime, len));
        std::sort(robust_idx.begin(), robust_idx.end());
        for (std::size_t p : robust_idx) sampled.push_back(batch[p]);
      }
      const auto t0 = std::chrono::steady_clock::now();
      const auto losses = batch_step(net, opt, epoch, ctx, batch, robust_idx, alpha);
      millis += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      reg_sum += losses.regular;
      if (losses.robust) rob_sum += *losses.robust;
      mixed_sum += losses.mixed;
      ++batches;
    }
    const auto nb = static_cast<double>(batches);
    rep.regular_loss = alpha < 1.0 ? reg_sum / nb : std::numeric_limits<double>::quiet_NaN();
    if (alpha > 0.0) rep.robust_loss = rob_sum / nb;
    rep.mixed_loss = mixed_sum / nb;
    rep.batch_millis = millis / nb;
    if (cfg.scheme == Scheme::mixtrain) {
      rep.sampled_accuracy = accuracy(net, data, sampled);
      schedule.update(rep.sampled_accuracy);
    } else {
      rep.sampled_accuracy = accuracy(net, data);
    }
    res.epochs.push_back(rep);
    if (on_epoch) on_epoch(rep);
  }
  res.net = std::move(net);
  return res;
}

inline TrainResult train_regular(Network net, const data::Dataset& data, TrainConfig cfg,
                                 const EpochCallback& cb = {}) {
  cfg.scheme = Scheme::regular;
  return train(std::move(net), data, cfg, cb);
}

inline TrainResult train_adversarial(Network net, const data::Dataset& data, TrainConfig cfg,
                                     const EpochCallback& cb = {}) {
  cfg.scheme = Scheme::adversarial;
  return train(std::move(net), data, cfg, cb);
}

inline TrainResult train_verifiable(Network net, const data::Dataset& data, TrainConfig cfg,
                                    const EpochCallback& cb = {}) {
  cfg.scheme = Scheme::verifiable;
  return train(std::move(net), data, cfg, cb);
}

inline TrainResult train_mixtrain(Network net, const data::Dataset& data, TrainConfig cfg,
                                  const EpochCallback& cb = {}) {
  cfg.scheme = Scheme::mixtrain;
  return train(std::move(net), data, cfg, cb);
}

inline void write_epoch_csv_header(std::ostream& os) {
  os << "epoch,epsilon,alpha,regular_loss,robust_loss,mixed_loss,sampled_accuracy,batch_millis\n";
}

inline void write_epoch_csv_row(std::ostream& os, const EpochReport& r) {
  os << r.epoch << ',' << std::setprecision(9) << r.epsilon << ',' << r.alpha << ',';
  if (std::isfinite(r.regular_loss)) os << r.regular_loss;
  os << ',';
  if (r.robust_loss) os << *r.robust_loss;
  os << ',' << r.mixed_loss << ',' << r.sampled_accuracy << ',' << std::setprecision(6)
     << r.batch_millis << '\n';
}

inline void write_epoch_csv(const std::vector<EpochReport>& reports, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw model::IoError("cannot open " + path.string() + " for writing");
  write_epoch_csv_header(out);
  for (const auto& r : reports) write_epoch_csv_row(out, r);
}

}  // namespace mixtrain::train
