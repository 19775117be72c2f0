#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixtrain/analysis/box.hpp"
#include "mixtrain/analysis/symbolic.hpp"
#include "mixtrain/data/dataset.hpp"
#include "mixtrain/model/gradients.hpp"
#include "mixtrain/model/loss.hpp"
#include "mixtrain/model/network.hpp"
#include "mixtrain/numerics/rng.hpp"

namespace mixtrain::attack {

using analysis::InputDomain;
using model::Network;

enum class AttackKind { fgsm, pgd, interval };

inline std::string to_string(AttackKind k) {
  switch (k) {
    case AttackKind::fgsm: return "fgsm";
    case AttackKind::pgd: return "pgd";
    case AttackKind::interval: return "interval";
  }
  return "?";
}

inline AttackKind parse_attack_kind(const std::string& s) {
  if (s == "fgsm") return AttackKind::fgsm;
  if (s == "pgd") return AttackKind::pgd;
  if (s == "interval") return AttackKind::interval;
  throw std::invalid_argument("unknown attack kind: " + s);
}

// All radii and step sizes are in raw [0, 1] input units. Interval-attack
// parameters left at 0 resolve to: step = eps/4, eps0 = eps/16.
struct AttackConfig {
  AttackKind kind = AttackKind::pgd;
  float epsilon = 0.1F;
  int pgd_steps = 40;
  float pgd_step = 0.01F;
  int restarts = 1;
  bool random_start = true;
  int interval_iterations = 20;
  float interval_step = 0.0F;
  float interval_eps0 = 0.0F;
  float interval_growth = 2.0F;
  std::uint64_t seed = 0;

  [[nodiscard]] float resolved_interval_step() const {
    return interval_step > 0.0F ? interval_step : epsilon / 4.0F;
  }
  [[nodiscard]] float resolved_interval_eps0() const {
    return interval_eps0 > 0.0F ? interval_eps0 : epsilon / 16.0F;
  }

  void validate() const {
    if (!(epsilon >= 0.0F)) throw std::invalid_argument("attack: epsilon must be >= 0");
    if (kind == AttackKind::pgd && (pgd_steps < 0 || !(pgd_step > 0.0F) || restarts < 1)) {
      throw std::invalid_argument("attack: pgd needs steps >= 0, step > 0, restarts >= 1");
    }
    if (kind == AttackKind::interval &&
        (interval_iterations < 0 || !(interval_growth > 1.0F) || interval_step < 0.0F ||
         interval_eps0 < 0.0F)) {
      throw std::invalid_argument("attack: interval needs iterations >= 0, growth p > 1");
    }
  }
};

struct AttackOutcome {
  bool success = false;
  std::vector<float> adversarial;  // best iterate (the violation when success)
  float loss = 0.0F;
  int iterations = 0;
};

// B_eps(x) intersected with the domain, rounded inward so every point it
// admits is within eps of x.
class FeasibleSet {
 public:
  FeasibleSet(std::span<const float> x, float eps, const InputDomain& domain)
      : lo_(x.size()), hi_(x.size()), scale_(domain.radius_scale) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = static_cast<double>(eps) * domain.radius_scale[i];
      const double lo_exact = static_cast<double>(x[i]) - r;
      const double hi_exact = static_cast<double>(x[i]) + r;
      float lo = static_cast<float>(lo_exact);
      float hi = static_cast<float>(hi_exact);
      if (lo < lo_exact) lo = numerics::step_up(lo);
      if (hi > hi_exact) hi = numerics::step_down(hi);
      // x itself is always feasible, even if it sits outside the domain.
      lo_[i] = std::min(std::max(lo, domain.lo[i]), x[i]);
      hi_[i] = std::max(std::min(hi, domain.hi[i]), x[i]);
    }
  }

  // Arbitrary box with a per-dimension step multiplier.
  static FeasibleSet from_bounds(std::span<const float> lo, std::span<const float> hi,
                                 std::vector<float> scale) {
    FeasibleSet f;
    f.lo_.assign(lo.begin(), lo.end());
    f.hi_.assign(hi.begin(), hi.end());
    f.scale_ = std::move(scale);
    return f;
  }

  void project(std::span<float> v) const {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], lo_[i], hi_[i]);
  }

  [[nodiscard]] bool contains(std::span<const float> v) const {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(lo_[i] <= v[i] && v[i] <= hi_[i])) return false;
    }
    return true;
  }

  [[nodiscard]] std::vector<float> random_point(numerics::Rng& rng) const {
    std::vector<float> v(lo_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.uniform(lo_[i], hi_[i]);
    return v;
  }

  [[nodiscard]] std::span<const float> lo() const noexcept { return lo_; }
  [[nodiscard]] std::span<const float> hi() const noexcept { return hi_; }
  [[nodiscard]] float scale(std::size_t i) const noexcept { return scale_[i]; }

 private:
  FeasibleSet() = default;

  std::vector<float> lo_;
  std::vector<float> hi_;
  std::vector<float> scale_;
};

namespace detail {

struct LossAndGrad {
  float loss;
  std::vector<float> grad;
};

inline LossAndGrad input_gradient(const Network& net, std::span<const float> x, std::size_t y) {
  auto tape = model::forward_tape<float>(net, x);
  const auto& logits = tape.logits();
  const float loss = model::cross_entropy(logits, y);
  const auto dl = model::cross_entropy_grad(logits, y);
  auto g = model::backward<float>(net, tape, dl);
  return {loss, std::move(g.input)};
}

inline float sign(float v) { return v > 0.0F ? 1.0F : (v < 0.0F ? -1.0F : 0.0F); }

// Sign-gradient ascent from `start`, projected onto `feasible` after every
// step. Stops at the first confirmed violation.
inline AttackOutcome ascend(const Network& net, std::span<const float> start, std::size_t y,
                            const FeasibleSet& feasible, int steps, float step) {
  AttackOutcome best;
  std::vector<float> cur(start.begin(), start.end());
  feasible.project(cur);
  best.loss = -std::numeric_limits<float>::infinity();
  for (int it = 0;; ++it) {
    auto lg = input_gradient(net, cur, y);
    if (!(lg.loss <= best.loss)) {
      best.loss = lg.loss;
      best.adversarial = cur;
    }
    best.iterations = it;
    if (model::is_violation(net, cur, y)) {
      best.success = true;
      best.loss = lg.loss;
      best.adversarial = cur;
      return best;
    }
    if (it == steps) break;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      cur[i] += step * feasible.scale(i) * sign(lg.grad[i]);
    }
    feasible.project(cur);
  }
  return best;
}

}  // namespace detail

// Single signed-gradient step of size eps.
inline AttackOutcome fgsm(const Network& net, std::span<const float> x, std::size_t y, float eps,
                          const InputDomain& domain) {
  const FeasibleSet feasible(x, eps, domain);
  auto lg = detail::input_gradient(net, x, y);
  std::vector<float> adv(x.begin(), x.end());
  for (std::size_t i = 0; i < adv.size(); ++i) {
    adv[i] += eps * feasible.scale(i) * detail::sign(lg.grad[i]);
  }
  feasible.project(adv);
  AttackOutcome out;
  out.iterations = 1;
  out.loss = model::cross_entropy(model::forward(net, adv), y);
  out.success = model::is_violation(net, adv, y);
  out.adversarial = std::move(adv);
  return out;
}

// PGD with `restarts` random starts; returns the first confirmed violation,
// otherwise the highest-loss iterate over all restarts.
inline AttackOutcome pgd(const Network& net, std::span<const float> x, std::size_t y,
                         const AttackConfig& cfg, const InputDomain& domain, numerics::Rng& rng) {
  const FeasibleSet feasible(x, cfg.epsilon, domain);
  AttackOutcome best;
  best.loss = -std::numeric_limits<float>::infinity();
  int used = 0;
  for (int r = 0; r < cfg.restarts; ++r) {
    const auto start = cfg.random_start ? feasible.random_point(rng)
                                        : std::vector<float>(x.begin(), x.end());
    auto out = detail::ascend(net, start, y, feasible, cfg.pgd_steps, cfg.pgd_step);
    used += out.iterations;
    if (out.success) {
      out.iterations = used;
      return out;
    }
    if (out.loss > best.loss) best = std::move(out);
  }
  best.iterations = used;
  return best;
}

// Interval attack: each iteration grows a region around the iterate until its
// worst-case logits admit a violation (or the region reaches eps/2), steps
// along the sign of the interval gradient of that region, and projects back
// into B_eps(x). Finishes with PGD from the final iterate.
inline AttackOutcome interval_attack(const Network& net, std::span<const float> x, std::size_t y,
                                     const AttackConfig& cfg, const InputDomain& domain) {
  const FeasibleSet feasible(x, cfg.epsilon, domain);
  std::vector<float> cur(x.begin(), x.end());
  AttackOutcome out;
  if (model::is_violation(net, cur, y)) {
    out.success = true;
    out.iterations = 1;
    out.loss = model::cross_entropy(model::forward(net, cur), y);
    out.adversarial = std::move(cur);
    return out;
  }
  const float eps0 = cfg.resolved_interval_eps0();
  const float step = cfg.resolved_interval_step();
  const float cap = cfg.epsilon / 2.0F;
  for (int it = 1; it <= cfg.interval_iterations; ++it) {
    float region = eps0;
    auto box = analysis::Box::around(cur, region, domain);
    auto prop = analysis::propagate(net, box);
    while (analysis::worst_case_logits(prop.output(), y, prop.overflow).verified()) {
      region *= cfg.interval_growth;
      box = analysis::Box::around(cur, region, domain);
      prop = analysis::propagate(net, box);
      if (region >= cap) break;
    }
    const auto g = analysis::interval_gradient(prop, box, y);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      cur[i] += step * feasible.scale(i) * detail::sign(g.gradient[i]);
    }
    feasible.project(cur);
    out.iterations = it;
    if (model::is_violation(net, cur, y)) {
      out.success = true;
      out.loss = model::cross_entropy(model::forward(net, cur), y);
      out.adversarial = std::move(cur);
      return out;
    }
  }
  auto fin = detail::ascend(net, cur, y, feasible, cfg.pgd_steps, cfg.pgd_step);
  fin.iterations += out.iterations;
  return fin;
}

// Madry-style training perturbation: random start, all steps, last iterate.
inline std::vector<float> pgd_perturb(const Network& net, std::span<const float> x, std::size_t y,
                                      const AttackConfig& cfg, const InputDomain& domain,
                                      numerics::Rng& rng) {
  std::vector<float> cur(x.begin(), x.end());
  if (cfg.epsilon == 0.0F) return cur;
  const FeasibleSet feasible(x, cfg.epsilon, domain);
  if (cfg.random_start) cur = feasible.random_point(rng);
  for (int it = 0; it < cfg.pgd_steps; ++it) {
    const auto lg = detail::input_gradient(net, cur, y);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      cur[i] += cfg.pgd_step * feasible.scale(i) * detail::sign(lg.grad[i]);
    }
    feasible.project(cur);
  }
  return cur;
}

inline AttackOutcome run_attack(const Network& net, std::span<const float> x, std::size_t y,
                                const AttackConfig& cfg, const InputDomain& domain,
                                numerics::Rng& rng) {
  switch (cfg.kind) {
    case AttackKind::fgsm: return fgsm(net, x, y, cfg.epsilon, domain);
    case AttackKind::pgd: return pgd(net, x, y, cfg, domain, rng);
    case AttackKind::interval: return interval_attack(net, x, y, cfg, domain);
  }
  return {};
}

struct SuccessReport {
  double rate = 0.0;
  std::vector<AttackOutcome> outcomes;
};

// Fraction of samples with a confirmed violation. Sample i draws its random
// starts from stream i of cfg.seed, so results do not depend on order.
inline SuccessReport attack_success_rate(const Network& net, const data::Dataset& ds,
                                         const AttackConfig& cfg) {
  if (ds.empty()) throw std::invalid_argument("attack_success_rate: empty dataset");
  cfg.validate();
  const auto domain = ds.domain();
  SuccessReport rep;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto rng = numerics::Rng::derive(cfg.seed, i);
    auto out = run_attack(net, ds.samples[i].x.span(), ds.samples[i].y, cfg, domain, rng);
    if (out.success) ++hits;
    rep.outcomes.push_back(std::move(out));
  }
  rep.rate = static_cast<double>(hits) / static_cast<double>(ds.size());
  return rep;
}

}  // namespace mixtrain::attack
