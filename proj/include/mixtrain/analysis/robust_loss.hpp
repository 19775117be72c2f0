#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mixtrain/analysis/box.hpp"
#include "mixtrain/model/gradients.hpp"
#include "mixtrain/model/loss.hpp"
#include "mixtrain/model/network.hpp"

namespace mixtrain::analysis {

// Differentiable counterpart of verifiable_robust_loss used by training.
// Same relaxation, evaluated in plain double arithmetic (no outward steps),
// with a reverse pass to the network parameters. Slopes and offsets of the
// unstable-neuron relaxations are differentiated through.
struct RobustLossResult {
  double loss = 0.0;
  std::vector<double> worst_logits;
  model::Gradients<double> grads;  // filled when requested
};

namespace detail {

enum class NeuronCase : unsigned char { inactive, active, unstable };

// Forms of one layer: n neurons over d inputs.
struct Forms {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> up;
  std::vector<double> low;
  std::vector<double> up_c;
  std::vector<double> low_c;

  void resize(std::size_t neurons, std::size_t dims) {
    n = neurons;
    d = dims;
    up.assign(n * d, 0.0);
    low.assign(n * d, 0.0);
    up_c.assign(n, 0.0);
    low_c.assign(n, 0.0);
  }
  double* up_row(std::size_t j) { return up.data() + j * d; }
  double* low_row(std::size_t j) { return low.data() + j * d; }
  [[nodiscard]] const double* up_row(std::size_t j) const { return up.data() + j * d; }
  [[nodiscard]] const double* low_row(std::size_t j) const { return low.data() + j * d; }
};

struct ReluRecord {
  NeuronCase kind = NeuronCase::inactive;
  bool relax_up = false;   // upper form scaled and shifted
  bool keep_low = false;   // lower form scaled (else zeroed) when unstable
  double u_up = 0.0, l_up = 0.0, slope_up = 0.0;
  double u_low = 0.0, l_low = 0.0, slope_low = 0.0;
};

inline double upper_of(const double* c, double k, std::span<const float> lo,
                       std::span<const float> hi, std::size_t d) {
  double s = k;
  for (std::size_t i = 0; i < d; ++i) s += c[i] * (c[i] > 0.0 ? hi[i] : lo[i]);
  return s;
}

inline double lower_of(const double* c, double k, std::span<const float> lo,
                       std::span<const float> hi, std::size_t d) {
  double s = k;
  for (std::size_t i = 0; i < d; ++i) s += c[i] * (c[i] > 0.0 ? lo[i] : hi[i]);
  return s;
}

// Adds g * d(upper_of)/d(c, k) into (gc, gk).
inline void upper_of_grad(const double* c, std::span<const float> lo, std::span<const float> hi,
                          std::size_t d, double g, double* gc, double& gk) {
  gk += g;
  for (std::size_t i = 0; i < d; ++i) gc[i] += g * (c[i] > 0.0 ? hi[i] : lo[i]);
}

inline void lower_of_grad(const double* c, std::span<const float> lo, std::span<const float> hi,
                          std::size_t d, double g, double* gc, double& gk) {
  gk += g;
  for (std::size_t i = 0; i < d; ++i) gc[i] += g * (c[i] > 0.0 ? lo[i] : hi[i]);
}

}  // namespace detail

inline RobustLossResult robust_loss(const model::Network& net, const Box& box, std::size_t y,
                                    bool want_grad = true) {
  using detail::Forms;
  using detail::NeuronCase;
  model::detail::check_input(net, box.dim());
  const std::size_t d = box.dim();
  const auto lo = box.lo();
  const auto hi = box.hi();
  const std::size_t depth = net.depth();

  std::vector<Forms> pre(depth);       // pre-activation forms per layer
  std::vector<Forms> post(depth - 1);  // post-ReLU forms per hidden layer
  std::vector<std::vector<detail::ReluRecord>> relu(depth - 1);

  for (std::size_t li = 0; li < depth; ++li) {
    const auto& layer = net.layer(li);
    const std::size_t n_out = layer.weight.rows();
    const std::size_t n_in = layer.weight.cols();
    Forms& cur = pre[li];
    cur.resize(n_out, d);
    if (li == 0) {
      for (std::size_t j = 0; j < n_out; ++j) {
        const auto row = layer.weight.row(j);
        for (std::size_t i = 0; i < d; ++i) cur.up_row(j)[i] = cur.low_row(j)[i] = row[i];
        cur.up_c[j] = cur.low_c[j] = layer.bias[j];
      }
    } else {
      const Forms& in = post[li - 1];
      for (std::size_t j = 0; j < n_out; ++j) {
        double* ou = cur.up_row(j);
        double* ol = cur.low_row(j);
        double cu = layer.bias[j];
        double cl = layer.bias[j];
        for (std::size_t k = 0; k < n_in; ++k) {
          const double w = layer.weight(j, k);
          if (w == 0.0) continue;
          const double* su = w > 0.0 ? in.up_row(k) : in.low_row(k);
          const double* sl = w > 0.0 ? in.low_row(k) : in.up_row(k);
          for (std::size_t i = 0; i < d; ++i) {
            ou[i] += w * su[i];
            ol[i] += w * sl[i];
          }
          cu += w * (w > 0.0 ? in.up_c[k] : in.low_c[k]);
          cl += w * (w > 0.0 ? in.low_c[k] : in.up_c[k]);
        }
        cur.up_c[j] = cu;
        cur.low_c[j] = cl;
      }
    }
    if (li + 1 == depth) break;

    Forms& out = post[li];
    out.resize(n_out, d);
    auto& rec = relu[li];
    rec.assign(n_out, {});
    for (std::size_t j = 0; j < n_out; ++j) {
      auto& r = rec[j];
      const double* up = cur.up_row(j);
      const double* low = cur.low_row(j);
      r.u_up = detail::upper_of(up, cur.up_c[j], lo, hi, d);
      r.l_low = detail::lower_of(low, cur.low_c[j], lo, hi, d);
      if (r.u_up <= 0.0) {
        r.kind = NeuronCase::inactive;
        continue;
      }
      if (r.l_low >= 0.0) {
        r.kind = NeuronCase::active;
        std::copy(up, up + d, out.up_row(j));
        std::copy(low, low + d, out.low_row(j));
        out.up_c[j] = cur.up_c[j];
        out.low_c[j] = cur.low_c[j];
        continue;
      }
      r.kind = NeuronCase::unstable;
      r.l_up = detail::lower_of(up, cur.up_c[j], lo, hi, d);
      if (r.l_up >= 0.0) {
        std::copy(up, up + d, out.up_row(j));
        out.up_c[j] = cur.up_c[j];
      } else {
        r.relax_up = true;
        r.slope_up = r.u_up / (r.u_up - r.l_up);
        for (std::size_t i = 0; i < d; ++i) out.up_row(j)[i] = r.slope_up * up[i];
        out.up_c[j] = r.slope_up * (cur.up_c[j] - r.l_up);
      }
      r.u_low = detail::upper_of(low, cur.low_c[j], lo, hi, d);
      if (r.u_low > 0.0) {
        r.keep_low = true;
        r.slope_low = r.u_low / (r.u_low - r.l_low);
        for (std::size_t i = 0; i < d; ++i) out.low_row(j)[i] = r.slope_low * low[i];
        out.low_c[j] = r.slope_low * cur.low_c[j];
      }
    }
  }

  const Forms& logits = pre.back();
  const std::size_t k = logits.n;
  RobustLossResult res;
  res.worst_logits.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    res.worst_logits[j] = j == y ? detail::lower_of(logits.low_row(j), logits.low_c[j], lo, hi, d)
                                 : detail::upper_of(logits.up_row(j), logits.up_c[j], lo, hi, d);
  }
  res.loss = model::cross_entropy(res.worst_logits, y);
  if (!want_grad) return res;

  // Reverse pass. g_pre holds d loss / d (pre-activation forms) of the
  // current layer.
  res.grads = model::Gradients<double>::zeros_like(net);
  const auto gd = model::cross_entropy_grad(res.worst_logits, y);
  Forms g_pre;
  g_pre.resize(k, d);
  for (std::size_t j = 0; j < k; ++j) {
    if (j == y) {
      detail::lower_of_grad(logits.low_row(j), lo, hi, d, gd[j], g_pre.low_row(j), g_pre.low_c[j]);
    } else {
      detail::upper_of_grad(logits.up_row(j), lo, hi, d, gd[j], g_pre.up_row(j), g_pre.up_c[j]);
    }
  }

  for (std::size_t li = depth; li-- > 0;) {
    const auto& layer = net.layer(li);
    const std::size_t n_out = layer.weight.rows();
    const std::size_t n_in = layer.weight.cols();
    auto& gw = res.grads.layers[li].weight;
    auto& gb = res.grads.layers[li].bias;
    for (std::size_t j = 0; j < n_out; ++j) gb[j] = g_pre.up_c[j] + g_pre.low_c[j];

    if (li == 0) {
      for (std::size_t j = 0; j < n_out; ++j) {
        for (std::size_t i = 0; i < d; ++i) {
          gw[j * n_in + i] = g_pre.up_row(j)[i] + g_pre.low_row(j)[i];
        }
      }
      break;
    }

    const Forms& in = post[li - 1];
    Forms g_post;
    g_post.resize(n_in, d);
    for (std::size_t j = 0; j < n_out; ++j) {
      const double* gu = g_pre.up_row(j);
      const double* gl = g_pre.low_row(j);
      const double gcu = g_pre.up_c[j];
      const double gcl = g_pre.low_c[j];
      for (std::size_t kk = 0; kk < n_in; ++kk) {
        const double w = layer.weight(j, kk);
        const bool pos = w > 0.0;
        // Form feeding this output's upper / lower form through weight w.
        const double* src_u = pos ? in.up_row(kk) : in.low_row(kk);
        const double* src_l = pos ? in.low_row(kk) : in.up_row(kk);
        const double src_cu = pos ? in.up_c[kk] : in.low_c[kk];
        const double src_cl = pos ? in.low_c[kk] : in.up_c[kk];
        double gwk = gcu * src_cu + gcl * src_cl;
        for (std::size_t i = 0; i < d; ++i) gwk += gu[i] * src_u[i] + gl[i] * src_l[i];
        gw[j * n_in + kk] = gwk;
        if (w == 0.0) continue;
        double* dst_u = pos ? g_post.up_row(kk) : g_post.low_row(kk);
        double* dst_l = pos ? g_post.low_row(kk) : g_post.up_row(kk);
        for (std::size_t i = 0; i < d; ++i) {
          dst_u[i] += w * gu[i];
          dst_l[i] += w * gl[i];
        }
        (pos ? g_post.up_c[kk] : g_post.low_c[kk]) += w * gcu;
        (pos ? g_post.low_c[kk] : g_post.up_c[kk]) += w * gcl;
      }
    }

    // Through the ReLU relaxation of layer li-1.
    const Forms& src = pre[li - 1];
    const auto& rec = relu[li - 1];
    Forms g_prev;
    g_prev.resize(n_in, d);
    for (std::size_t kk = 0; kk < n_in; ++kk) {
      const auto& r = rec[kk];
      if (r.kind == NeuronCase::inactive) continue;
      const double* gpu = g_post.up_row(kk);
      const double* gpl = g_post.low_row(kk);
      double* gu = g_prev.up_row(kk);
      double* gl = g_prev.low_row(kk);
      const double* up = src.up_row(kk);
      const double* low = src.low_row(kk);
      if (r.kind == NeuronCase::active || !r.relax_up) {
        for (std::size_t i = 0; i < d; ++i) gu[i] += gpu[i];
        g_prev.up_c[kk] += g_post.up_c[kk];
      } else {
        const double s = r.slope_up;
        const double span = r.u_up - r.l_up;
        double g_slope = g_post.up_c[kk] * (src.up_c[kk] - r.l_up);
        for (std::size_t i = 0; i < d; ++i) {
          gu[i] += s * gpu[i];
          g_slope += gpu[i] * up[i];
        }
        g_prev.up_c[kk] += s * g_post.up_c[kk];
        const double g_u = g_slope * (-r.l_up) / (span * span);
        const double g_l = -s * g_post.up_c[kk] + g_slope * r.u_up / (span * span);
        detail::upper_of_grad(up, lo, hi, d, g_u, gu, g_prev.up_c[kk]);
        detail::lower_of_grad(up, lo, hi, d, g_l, gu, g_prev.up_c[kk]);
      }
      if (r.kind == NeuronCase::active) {
        for (std::size_t i = 0; i < d; ++i) gl[i] += gpl[i];
        g_prev.low_c[kk] += g_post.low_c[kk];
      } else if (r.keep_low) {
        const double s = r.slope_low;
        const double span = r.u_low - r.l_low;
        double g_slope = g_post.low_c[kk] * src.low_c[kk];
        for (std::size_t i = 0; i < d; ++i) {
          gl[i] += s * gpl[i];
          g_slope += gpl[i] * low[i];
        }
        g_prev.low_c[kk] += s * g_post.low_c[kk];
        const double g_u = g_slope * (-r.l_low) / (span * span);
        const double g_l = g_slope * r.u_low / (span * span);
        detail::upper_of_grad(low, lo, hi, d, g_u, gl, g_prev.low_c[kk]);
        detail::lower_of_grad(low, lo, hi, d, g_l, gl, g_prev.low_c[kk]);
      }
    }
    g_pre = std::move(g_prev);
  }
  return res;
}

}  // namespace mixtrain::analysis
