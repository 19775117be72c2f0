#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mixtrain/analysis/box.hpp"
#include "mixtrain/model/loss.hpp"
#include "mixtrain/model/network.hpp"
#include "mixtrain/numerics/interval.hpp"
#include "mixtrain/numerics/rounding.hpp"

namespace mixtrain::analysis {

using model::Network;
using numerics::Interval;

// Read-only view of one affine form  coeffs . x + constant.
struct AffineView {
  std::span<const float> coeffs;
  float constant;
};

// Symbolic bounds for every neuron of one layer, stored as two coefficient
// matrices (neurons x input dims). For all x in the box the exact neuron
// value v(x) satisfies  lower_eq(j)(x) <= v(x) <= upper_eq(j)(x),
// and concrete(j) encloses v over the whole box.
struct SymbolicBounds {
  std::size_t neurons = 0;
  std::size_t inputs = 0;
  std::vector<float> up_coeff;
  std::vector<float> low_coeff;
  std::vector<float> up_const;
  std::vector<float> low_const;
  std::vector<Interval> concrete;

  [[nodiscard]] AffineView upper_eq(std::size_t j) const {
    return {{up_coeff.data() + j * inputs, inputs}, up_const[j]};
  }
  [[nodiscard]] AffineView lower_eq(std::size_t j) const {
    return {{low_coeff.data() + j * inputs, inputs}, low_const[j]};
  }
};

// Pre-activation bounds of every layer; layers.back() bounds the logits.
struct Propagation {
  std::vector<SymbolicBounds> layers;
  bool overflow = false;

  [[nodiscard]] const SymbolicBounds& output() const { return layers.back(); }
};

namespace detail {

inline constexpr float kInf = std::numeric_limits<float>::infinity();

// Sound max / min of an affine form over the box.
inline float upper_over(AffineView eq, const Box& box) {
  double s = eq.constant;
  double mag = std::abs(static_cast<double>(eq.constant));
  for (std::size_t i = 0; i < eq.coeffs.size(); ++i) {
    const float c = eq.coeffs[i];
    if (c == 0.0F) continue;
    const double t = static_cast<double>(c) * (c > 0.0F ? box.hi(i) : box.lo(i));
    s += t;
    mag += std::abs(t);
  }
  return numerics::up_from(s + numerics::sum_error_factor(eq.coeffs.size()) * mag);
}

inline float lower_over(AffineView eq, const Box& box) {
  double s = eq.constant;
  double mag = std::abs(static_cast<double>(eq.constant));
  for (std::size_t i = 0; i < eq.coeffs.size(); ++i) {
    const float c = eq.coeffs[i];
    if (c == 0.0F) continue;
    const double t = static_cast<double>(c) * (c > 0.0F ? box.lo(i) : box.hi(i));
    s += t;
    mag += std::abs(t);
  }
  return numerics::down_from(s - numerics::sum_error_factor(eq.coeffs.size()) * mag);
}

// Rounds double coefficients to float and returns the worst-case effect of
// the rounding error over the box, sum_i err_i * max|x_i|, as a double
// (already inflated for its own summation error).
inline double round_coefficients(std::span<const double> exact, std::span<const double> err_bound,
                                 std::span<float> out, std::span<const double> magnitude) {
  double slack = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const auto c = static_cast<float>(exact[i]);
    out[i] = c;
    const double e = std::abs(static_cast<double>(c) - exact[i]) + err_bound[i];
    slack += e * magnitude[i];
  }
  return slack * (1.0 + numerics::sum_error_factor(exact.size()));
}

inline void mark_overflow(SymbolicBounds& b, std::size_t j, bool& overflow) {
  overflow = true;
  b.concrete[j] = Interval(-kInf, kInf);
}

}  // namespace detail

// Symbolic linear relaxation of the network over `box`. Coefficient and
// constant arithmetic is accumulated in double and handed back to float with
// outward rounding; coefficient rounding error is folded into the constants,
// so every stored form is a sound bound in exact arithmetic.
inline Propagation propagate(const Network& net, const Box& box) {
  model::detail::check_input(net, box.dim());
  const std::size_t d = box.dim();
  std::vector<double> magnitude(d);
  for (std::size_t i = 0; i < d; ++i) {
    magnitude[i] = std::max(std::abs(static_cast<double>(box.lo(i))),
                            std::abs(static_cast<double>(box.hi(i))));
  }

  Propagation prop;
  prop.layers.reserve(net.depth());

  // Post-ReLU forms of the previous layer.
  std::vector<float> in_up;
  std::vector<float> in_low;
  std::vector<float> in_up_c;
  std::vector<float> in_low_c;

  std::vector<double> acc_u(d);
  std::vector<double> acc_l(d);
  std::vector<double> mag_u(d);
  std::vector<double> mag_l(d);
  std::vector<double> err(d);
  std::vector<double> exact(d);

  for (std::size_t li = 0; li < net.depth(); ++li) {
    const auto& layer = net.layer(li);
    const std::size_t n_out = layer.weight.rows();
    const std::size_t n_in = layer.weight.cols();
    SymbolicBounds cur;
    cur.neurons = n_out;
    cur.inputs = d;
    cur.up_coeff.assign(n_out * d, 0.0F);
    cur.low_coeff.assign(n_out * d, 0.0F);
    cur.up_const.assign(n_out, 0.0F);
    cur.low_const.assign(n_out, 0.0F);
    cur.concrete.assign(n_out, Interval(0.0F));

    if (li == 0) {
      // The first affine map is exact: its forms are the weight rows.
      for (std::size_t j = 0; j < n_out; ++j) {
        const auto row = layer.weight.row(j);
        std::copy(row.begin(), row.end(), cur.up_coeff.begin() + static_cast<std::ptrdiff_t>(j * d));
        std::copy(row.begin(), row.end(), cur.low_coeff.begin() + static_cast<std::ptrdiff_t>(j * d));
        cur.up_const[j] = layer.bias[j];
        cur.low_const[j] = layer.bias[j];
      }
    } else {
      const double gamma = numerics::sum_error_factor(n_in + 1);
      for (std::size_t j = 0; j < n_out; ++j) {
        std::fill(acc_u.begin(), acc_u.end(), 0.0);
        std::fill(acc_l.begin(), acc_l.end(), 0.0);
        std::fill(mag_u.begin(), mag_u.end(), 0.0);
        std::fill(mag_l.begin(), mag_l.end(), 0.0);
        double cu = layer.bias[j];
        double cl = layer.bias[j];
        double cmag_u = std::abs(cu);
        double cmag_l = std::abs(cl);
        const auto wrow = layer.weight.row(j);
        for (std::size_t k = 0; k < n_in; ++k) {
          const double w = wrow[k];
          if (w == 0.0) continue;
          // Positive weights keep the orientation, negative weights swap it.
          const float* src_u = (w > 0.0 ? in_up.data() : in_low.data()) + k * d;
          const float* src_l = (w > 0.0 ? in_low.data() : in_up.data()) + k * d;
          for (std::size_t i = 0; i < d; ++i) {
            const double tu = w * src_u[i];
            const double tl = w * src_l[i];
            acc_u[i] += tu;
            acc_l[i] += tl;
            mag_u[i] += std::abs(tu);
            mag_l[i] += std::abs(tl);
          }
          const double tcu = w * (w > 0.0 ? in_up_c[k] : in_low_c[k]);
          const double tcl = w * (w > 0.0 ? in_low_c[k] : in_up_c[k]);
          cu += tcu;
          cl += tcl;
          cmag_u += std::abs(tcu);
          cmag_l += std::abs(tcl);
        }
        for (std::size_t i = 0; i < d; ++i) err[i] = gamma * mag_u[i];
        const double slack_u = detail::round_coefficients(
            acc_u, err, {cur.up_coeff.data() + j * d, d}, magnitude);
        for (std::size_t i = 0; i < d; ++i) err[i] = gamma * mag_l[i];
        const double slack_l = detail::round_coefficients(
            acc_l, err, {cur.low_coeff.data() + j * d, d}, magnitude);
        cur.up_const[j] = numerics::up_from(cu + gamma * cmag_u + slack_u);
        cur.low_const[j] = numerics::down_from(cl - gamma * cmag_l - slack_l);
      }
    }

    for (std::size_t j = 0; j < n_out; ++j) {
      const float l = detail::lower_over(cur.lower_eq(j), box);
      const float u = detail::upper_over(cur.upper_eq(j), box);
      if (std::isnan(l) || std::isnan(u) || l > u) {
        detail::mark_overflow(cur, j, prop.overflow);
      } else {
        cur.concrete[j] = Interval(l, u);
        if (std::isinf(l) || std::isinf(u)) prop.overflow = true;
      }
    }

    const bool hidden = li + 1 < net.depth();
    if (hidden) {
      in_up.assign(n_out * d, 0.0F);
      in_low.assign(n_out * d, 0.0F);
      in_up_c.assign(n_out, 0.0F);
      in_low_c.assign(n_out, 0.0F);
      for (std::size_t j = 0; j < n_out; ++j) {
        const float l = cur.concrete[j].lo();
        const float u = cur.concrete[j].hi();
        const auto up = cur.upper_eq(j);
        const auto low = cur.lower_eq(j);
        float* out_up = in_up.data() + j * d;
        float* out_low = in_low.data() + j * d;
        if (u <= 0.0F) continue;  // inactive: both forms are 0
        if (l >= 0.0F) {          // active: identity
          std::copy(up.coeffs.begin(), up.coeffs.end(), out_up);
          std::copy(low.coeffs.begin(), low.coeffs.end(), out_low);
          in_up_c[j] = up.constant;
          in_low_c[j] = low.constant;
          continue;
        }
        // Unstable neuron. Upper form: line through (l_up, 0) and (u_up, u_up).
        const float l_up = detail::lower_over(up, box);
        if (l_up >= 0.0F) {
          std::copy(up.coeffs.begin(), up.coeffs.end(), out_up);
          in_up_c[j] = up.constant;
        } else {
          const double u_up = u;
          // Any slope >= u/(u-l) keeps the line above the ReLU on [l, u].
          const double slope =
              numerics::up_from(u_up / (u_up - static_cast<double>(l_up)));
          for (std::size_t i = 0; i < d; ++i) {
            exact[i] = slope * up.coeffs[i];
            err[i] = 0.0;
          }
          const double slack =
              detail::round_coefficients(exact, err, {out_up, d}, magnitude);
          in_up_c[j] = numerics::up_from(
              slope * (static_cast<double>(up.constant) - static_cast<double>(l_up)) + slack);
        }
        // Lower form: scaled by a slope in [0, 1], which stays below the ReLU.
        const float u_low = detail::upper_over(low, box);
        if (u_low > 0.0F) {
          const double l_low = l;
          const double slope =
              std::clamp(static_cast<double>(static_cast<float>(u_low / (u_low - l_low))), 0.0, 1.0);
          for (std::size_t i = 0; i < d; ++i) {
            exact[i] = slope * low.coeffs[i];
            err[i] = 0.0;
          }
          const double slack =
              detail::round_coefficients(exact, err, {out_low, d}, magnitude);
          in_low_c[j] = numerics::down_from(slope * low.constant - slack);
        }
      }
    }
    prop.layers.push_back(std::move(cur));
  }
  return prop;
}

// Naive interval propagation, the cheap alternative to the symbolic forms.
inline std::vector<Interval> propagate_intervals(const Network& net, const Box& box) {
  model::detail::check_input(net, box.dim());
  std::vector<Interval> v;
  v.reserve(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) v.emplace_back(box.lo(i), box.hi(i));
  for (std::size_t li = 0; li < net.depth(); ++li) {
    const auto& layer = net.layer(li);
    auto z = numerics::matvec_interval(layer.weight, v);
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] = z[j] + Interval(layer.bias[j]);
      if (li + 1 < net.depth()) z[j] = numerics::relu(z[j]);
    }
    v = std::move(z);
  }
  return v;
}

enum class BoundMode { symbolic, naive_interval };

// d_eps: lower bound for the label logit, upper bounds for all others.
struct WorstCaseLogits {
  std::vector<float> d;
  std::size_t label = 0;
  bool overflow = false;

  // Verified iff the label's lower bound beats every other upper bound;
  // ties are not verified.
  [[nodiscard]] bool verified() const noexcept {
    if (overflow) return false;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j != label && !(d[label] > d[j])) return false;
    }
    return true;
  }
};

inline WorstCaseLogits worst_case_logits(const SymbolicBounds& out, std::size_t y,
                                         bool overflow = false) {
  WorstCaseLogits w;
  w.label = y;
  w.overflow = overflow;
  w.d.resize(out.neurons);
  for (std::size_t j = 0; j < out.neurons; ++j) {
    w.d[j] = j == y ? out.concrete[j].lo() : out.concrete[j].hi();
    if (!std::isfinite(w.d[j])) w.overflow = true;
  }
  return w;
}

inline WorstCaseLogits worst_case_logits(const Network& net, const Box& box, std::size_t y,
                                         BoundMode mode = BoundMode::symbolic) {
  if (y >= net.output_dim()) throw std::out_of_range("worst_case_logits: label out of range");
  if (mode == BoundMode::symbolic) {
    const auto prop = propagate(net, box);
    return worst_case_logits(prop.output(), y, prop.overflow);
  }
  const auto iv = propagate_intervals(net, box);
  WorstCaseLogits w;
  w.label = y;
  w.d.resize(iv.size());
  for (std::size_t j = 0; j < iv.size(); ++j) {
    w.d[j] = j == y ? iv[j].lo() : iv[j].hi();
    if (!std::isfinite(w.d[j])) w.overflow = true;
  }
  return w;
}

// Cross-entropy of the worst-case logits: an upper bound on the loss at every
// point of the box. Returns +inf on overflow.
inline float verifiable_robust_loss(const Network& net, const Box& box, std::size_t y,
                                    BoundMode mode = BoundMode::symbolic) {
  const auto w = worst_case_logits(net, box, y, mode);
  if (w.overflow) return std::numeric_limits<float>::infinity();
  // Rounded up: CE is increasing in d_j (j != y) and decreasing in d_y.
  const auto d = std::vector<double>(w.d.begin(), w.d.end());
  return numerics::up_from(model::cross_entropy(d, y));
}

// Gradient of the worst-case loss with respect to translating the box, with
// the relaxation (slopes and offsets) held fixed. Pinned box faces do not
// move.
struct IntervalGradient {
  std::vector<float> gradient;
  WorstCaseLogits logits;
};

inline IntervalGradient interval_gradient(const Propagation& prop, const Box& box, std::size_t y) {
  const auto& out = prop.output();
  IntervalGradient g;
  g.logits = worst_case_logits(out, y, prop.overflow);
  g.gradient.assign(box.dim(), 0.0F);
  if (g.logits.overflow) return g;
  const std::vector<double> d(g.logits.d.begin(), g.logits.d.end());
  const auto gd = model::cross_entropy_grad(d, y);
  std::vector<double> acc(box.dim(), 0.0);
  for (std::size_t j = 0; j < out.neurons; ++j) {
    if (gd[j] == 0.0) continue;
    // d_j depends on the hi face where its coefficient is positive for an
    // upper form (j != y), and on the lo face for the label's lower form.
    const auto eq = j == y ? out.lower_eq(j) : out.upper_eq(j);
    for (std::size_t i = 0; i < box.dim(); ++i) {
      const float c = eq.coeffs[i];
      if (c == 0.0F) continue;
      const bool uses_hi = (j == y) ? c < 0.0F : c > 0.0F;
      const bool pinned = uses_hi ? box.hi_pinned(i) : box.lo_pinned(i);
      if (!pinned) acc[i] += gd[j] * c;
    }
  }
  for (std::size_t i = 0; i < box.dim(); ++i) g.gradient[i] = static_cast<float>(acc[i]);
  return g;
}

inline IntervalGradient interval_gradient(const Network& net, const Box& box, std::size_t y) {
  return interval_gradient(propagate(net, box), box, y);
}

}  // namespace mixtrain::analysis
