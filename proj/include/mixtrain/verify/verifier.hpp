#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixtrain/analysis/box.hpp"
#include "mixtrain/analysis/symbolic.hpp"
#include "mixtrain/attack/attack.hpp"
#include "mixtrain/data/dataset.hpp"
#include "mixtrain/model/network.hpp"
#include "mixtrain/verify/work_pool.hpp"

namespace mixtrain::verify {

using analysis::Box;
using analysis::InputDomain;
using model::Network;

struct RobustnessSpec {
  float epsilon = 0.1F;  // raw [0, 1] units
  int max_depth = 20;
  std::int64_t timeout_ms = 10000;  // per input, summed over its nodes
  std::size_t workers = 1;
  int polish_steps = 10;  // PGD steps inside an unverified leaf candidate

  void validate() const {
    if (!(epsilon >= 0.0F)) throw std::invalid_argument("verify: epsilon must be >= 0");
    if (max_depth < 0) throw std::invalid_argument("verify: max depth must be >= 0");
    if (workers < 1) throw std::invalid_argument("verify: need at least one worker");
  }
};

enum class VerdictKind { verified, counterexample, undecided };

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::verified: return "verified";
    case VerdictKind::counterexample: return "counterexample";
    case VerdictKind::undecided: return "undecided";
  }
  return "?";
}

struct Verdict {
  VerdictKind kind = VerdictKind::undecided;
  std::vector<float> counterexample;  // confirmed violation when kind == counterexample
  bool misclassified = false;         // x itself is the counterexample
  bool timed_out = false;
  std::uint64_t nodes = 0;
  double millis = 0.0;
};

// Split dimension: largest width_i * |g_i| (interval-gradient smear), ties to
// the lowest index. All-zero smear falls back to the widest dimension.
inline std::size_t choose_split(std::span<const float> gradient, const Box& box) {
  if (box.dim() == 0) throw std::invalid_argument("choose_split: empty box");
  std::size_t best = 0;
  double best_smear = -1.0;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const double smear = static_cast<double>(box.width(i)) * std::abs(gradient[i]);
    if (smear > best_smear) {
      best_smear = smear;
      best = i;
    }
  }
  if (best_smear > 0.0) return best;
  std::size_t widest = 0;
  for (std::size_t i = 1; i < box.dim(); ++i) {
    if (box.width(i) > box.width(widest)) widest = i;
  }
  return widest;
}

// Outcome of examining one node of the bisection tree. A pure function of
// (net, box, label, spec).
struct NodeOutcome {
  enum class Kind { verified, counterexample, split, stuck } kind = Kind::stuck;
  std::vector<float> counterexample;
  std::size_t split_dim = 0;
};

namespace detail {

// Corner of the box that maximizes (upper form of the strongest rival) minus
// (lower form of the label), then a short PGD polish inside the box.
inline std::optional<std::vector<float>> find_candidate(const Network& net, const Box& box,
                                                        const analysis::Propagation& prop,
                                                        const analysis::WorstCaseLogits& w,
                                                        std::size_t y, int polish_steps) {
  std::size_t rival = y == 0 ? 1 : 0;
  for (std::size_t j = 0; j < w.d.size(); ++j) {
    if (j != y && w.d[j] > w.d[rival]) rival = j;
  }
  const auto& out = prop.output();
  const auto up = out.upper_eq(rival);
  const auto low = out.lower_eq(y);
  std::vector<float> corner(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const double slope = static_cast<double>(up.coeffs[i]) - low.coeffs[i];
    corner[i] = slope > 0.0 ? box.hi(i) : box.lo(i);
  }
  if (model::is_violation(net, corner, y)) return corner;
  if (polish_steps <= 0) return std::nullopt;
  std::vector<float> step(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) step[i] = box.width(i) / 4.0F;
  const auto feasible = attack::FeasibleSet::from_bounds(box.lo(), box.hi(), std::move(step));
  auto polished = attack::detail::ascend(net, corner, y, feasible, polish_steps, 1.0F);
  if (polished.success) return std::move(polished.adversarial);
  return std::nullopt;
}

}  // namespace detail

inline NodeOutcome examine_node(const Network& net, const Box& box, std::size_t y, int depth,
                                const RobustnessSpec& spec) {
  NodeOutcome res;
  const auto prop = analysis::propagate(net, box);
  const auto w = analysis::worst_case_logits(prop.output(), y, prop.overflow);
  if (w.verified()) {
    res.kind = NodeOutcome::Kind::verified;
    return res;
  }
  if (!prop.overflow) {
    if (auto cex = detail::find_candidate(net, box, prop, w, y, spec.polish_steps)) {
      res.kind = NodeOutcome::Kind::counterexample;
      res.counterexample = std::move(*cex);
      return res;
    }
  }
  if (depth >= spec.max_depth) return res;  // stuck
  const auto g = analysis::interval_gradient(prop, box, y);
  const std::size_t dim = choose_split(g.gradient, box);
  if (!(box.width(dim) > 0.0F)) return res;
  const auto [left, right] = box.bisect(dim);
  // A split that cannot shrink the box (one float apart) makes no progress.
  if (left.width(dim) == box.width(dim) || right.width(dim) == box.width(dim)) return res;
  res.kind = NodeOutcome::Kind::split;
  res.split_dim = dim;
  return res;
}

namespace detail {

struct Node {
  std::size_t input = 0;
  Box box;
  int depth = 0;
};

struct InputState {
  std::atomic<bool> found{false};
  std::atomic<bool> stuck{false};
  std::atomic<bool> timed_out{false};
  std::atomic<std::uint64_t> nodes{0};
  std::atomic<std::int64_t> nanos{0};
  std::mutex mu;
  std::vector<float> counterexample;
};

}  // namespace detail

// Verdicts for many inputs. Bisection nodes from all inputs share one
// work-stealing pool, so a single deep tree is spread over all workers.
// Verdicts do not depend on scheduling: exploration only stops early for an
// input once a confirmed counterexample exists, and any counterexample
// yields the same verdict.
inline std::vector<Verdict> verify_inputs(const Network& net,
                                          const std::vector<std::vector<float>>& xs,
                                          std::span<const std::size_t> labels,
                                          const RobustnessSpec& spec, const InputDomain& domain) {
  spec.validate();
  const std::size_t n = xs.size();
  std::vector<Verdict> verdicts(n);
  std::vector<detail::InputState> states(n);
  std::vector<detail::Node> roots;
  for (std::size_t i = 0; i < n; ++i) {
    if (model::is_violation(net, xs[i], labels[i])) {
      verdicts[i].kind = VerdictKind::counterexample;
      verdicts[i].misclassified = true;
      verdicts[i].counterexample = xs[i];
      continue;
    }
    roots.push_back({i, Box::around(xs[i], spec.epsilon, domain), 0});
  }
  const auto timeout_ns = spec.timeout_ms * 1'000'000;

  WorkStealingPool<detail::Node> pool(spec.workers);
  pool.run(std::move(roots), [&](const detail::Node& node, std::vector<detail::Node>& children) {
    auto& st = states[node.input];
    if (st.found.load(std::memory_order_relaxed)) return;
    if (spec.timeout_ms > 0 && st.nanos.load(std::memory_order_relaxed) > timeout_ns) {
      st.timed_out.store(true);
      st.stuck.store(true);
      return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto res = examine_node(net, node.box, labels[node.input], node.depth, spec);
    st.nodes.fetch_add(1, std::memory_order_relaxed);
    switch (res.kind) {
      case NodeOutcome::Kind::verified: break;
      case NodeOutcome::Kind::counterexample: {
        std::lock_guard lock(st.mu);
        if (!st.found.exchange(true)) st.counterexample = std::move(res.counterexample);
        break;
      }
      case NodeOutcome::Kind::stuck: st.stuck.store(true); break;
      case NodeOutcome::Kind::split: {
        auto [left, right] = node.box.bisect(res.split_dim);
        children.push_back({node.input, std::move(left), node.depth + 1});
        children.push_back({node.input, std::move(right), node.depth + 1});
        break;
      }
    }
    const auto dt = std::chrono::steady_clock::now() - t0;
    st.nanos.fetch_add(std::chrono::duration_cast<std::chrono::nanoseconds>(dt).count(),
                       std::memory_order_relaxed);
  });

  for (std::size_t i = 0; i < n; ++i) {
    auto& v = verdicts[i];
    if (v.misclassified) continue;
    auto& st = states[i];
    v.nodes = st.nodes.load();
    v.millis = static_cast<double>(st.nanos.load()) / 1e6;
    v.timed_out = st.timed_out.load();
    if (st.found.load()) {
      v.kind = VerdictKind::counterexample;
      v.counterexample = std::move(st.counterexample);
    } else if (st.stuck.load()) {
      v.kind = VerdictKind::undecided;
    } else {
      v.kind = VerdictKind::verified;
    }
  }
  return verdicts;
}

inline Verdict verify_input(const Network& net, std::span<const float> x, std::size_t y,
                            const RobustnessSpec& spec, const InputDomain& domain) {
  const std::vector<std::vector<float>> xs{std::vector<float>(x.begin(), x.end())};
  const std::size_t labels[] = {y};
  return std::move(verify_inputs(net, xs, labels, spec, domain).front());
}

}  // namespace mixtrain::verify
