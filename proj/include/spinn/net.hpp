#pragma once

// Single-hidden-layer network with closed-form input derivatives (orders 0-3)
// and closed-form parameter gradients of the value and of the first input
// derivative. The topology is fixed, so no autodiff machinery is needed; the
// formulas below are verified against finite differences in the test suite.

#include "spinn/math.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>

namespace spinn {

enum TensorFlag : unsigned {
  TW1 = 1u,
  TB1 = 2u,
  TW2 = 4u,
  TB2 = 8u,
};

enum class Activation { Sigmoid, DoubleSigmoid };

struct ShallowNet {
  int n_hidden = 0;
  int n_out = 1;
  std::vector<Real> w1; // [n_hidden]
  std::vector<Real> b1; // [n_hidden]
  std::vector<Real> w2; // [n_out][n_hidden], row-major
  std::vector<Real> b2; // [n_out]
  unsigned frozen = 0;  // TensorFlag mask; optimizer visibility only

  Activation activation = Activation::Sigmoid;
  Real act_shift = 0.0; // DoubleSigmoid: a(z) = sigmoid(z) - sigmoid(z - act_shift)

  ShallowNet() = default;
  ShallowNet(int hidden, int out)
      : n_hidden(hidden), n_out(out), w1(hidden, 0.0), b1(hidden, 0.0),
        w2(static_cast<std::size_t>(out) * hidden, 0.0), b2(out, 0.0) {}

  Real& w2_at(int j, int k) { return w2[static_cast<std::size_t>(j) * n_hidden + k]; }
  Real w2_at(int j, int k) const { return w2[static_cast<std::size_t>(j) * n_hidden + k]; }

  void validate() const {
    if (n_hidden < 1 || n_out < 1)
      throw std::invalid_argument("ShallowNet: n_hidden and n_out must be >= 1");
    if (static_cast<int>(w1.size()) != n_hidden || static_cast<int>(b1.size()) != n_hidden ||
        w2.size() != static_cast<std::size_t>(n_out) * n_hidden ||
        static_cast<int>(b2.size()) != n_out)
      throw std::invalid_argument("ShallowNet: tensor shapes do not match n_hidden/n_out");
    if (!all_finite(w1) || !all_finite(b1) || !all_finite(w2) || !all_finite(b2))
      throw std::invalid_argument("ShallowNet: non-finite parameter entry");
  }
};

/// Activation value and derivatives at one pre-activation.
struct ActDerivs {
  Real a = 0, a1 = 0, a2 = 0, a3 = 0;
};

inline ActDerivs act_eval(const ShallowNet& net, Real z, int max_order) {
  ActDerivs r;
  const Real s = sigmoid(z);
  r.a = s;
  if (max_order >= 1) r.a1 = sigmoid_d1_from_s(s);
  if (max_order >= 2) r.a2 = sigmoid_d2_from_s(s);
  if (max_order >= 3) r.a3 = sigmoid_d3_from_s(s);
  if (net.activation == Activation::DoubleSigmoid) {
    const Real t = sigmoid(z - net.act_shift);
    r.a -= t;
    if (max_order >= 1) r.a1 -= sigmoid_d1_from_s(t);
    if (max_order >= 2) r.a2 -= sigmoid_d2_from_s(t);
    if (max_order >= 3) r.a3 -= sigmoid_d3_from_s(t);
  }
  return r;
}

/// Network value and input derivatives up to max_order, all outputs at once.
struct EvalBundle {
  std::vector<Real> value;
  std::vector<Real> d1;
  std::vector<Real> d2;
  std::vector<Real> d3;
};

inline EvalBundle derivatives(const ShallowNet& net, Real x, int max_order) {
  if (max_order < 0 || max_order > 3)
    throw std::invalid_argument("derivatives: max_order must be in [0,3]");
  EvalBundle out;
  out.value.assign(net.n_out, 0.0);
  if (max_order >= 1) out.d1.assign(net.n_out, 0.0);
  if (max_order >= 2) out.d2.assign(net.n_out, 0.0);
  if (max_order >= 3) out.d3.assign(net.n_out, 0.0);
  for (int k = 0; k < net.n_hidden; ++k) {
    const Real wk = net.w1[k];
    const ActDerivs ad = act_eval(net, wk * x + net.b1[k], max_order);
    const Real g1 = ad.a1 * wk;
    const Real g2 = ad.a2 * wk * wk;
    const Real g3 = ad.a3 * wk * wk * wk;
    for (int j = 0; j < net.n_out; ++j) {
      const Real w = net.w2_at(j, k);
      out.value[j] += w * ad.a;
      if (max_order >= 1) out.d1[j] += w * g1;
      if (max_order >= 2) out.d2[j] += w * g2;
      if (max_order >= 3) out.d3[j] += w * g3;
    }
  }
  for (int j = 0; j < net.n_out; ++j) out.value[j] += net.b2[j];
  return out;
}

inline std::vector<Real> forward(const ShallowNet& net, Real x) {
  return derivatives(net, x, 0).value;
}

/// Gradients of every output (and optionally of its first input derivative)
/// with respect to each parameter tensor. Frozen tensors report zeros.
struct ParamGradients {
  int n_hidden = 0, n_out = 0;
  // [n_out][n_hidden] row-major; val_w2[j][k] is d out_j / d w2[j,k]
  // (cross-output w2 entries do not influence out_j).
  std::vector<Real> val_w1, val_b1, val_w2;
  std::vector<Real> val_b2; // [n_out]
  std::vector<Real> d1_w1, d1_b1, d1_w2;
  std::vector<Real> d1_b2;

  Real& at(std::vector<Real>& t, int j, int k) { return t[static_cast<std::size_t>(j) * n_hidden + k]; }
};

inline ParamGradients param_gradients(const ShallowNet& net, Real x, bool through_d1) {
  ParamGradients g;
  g.n_hidden = net.n_hidden;
  g.n_out = net.n_out;
  const std::size_t nm = static_cast<std::size_t>(net.n_out) * net.n_hidden;
  g.val_w1.assign(nm, 0.0);
  g.val_b1.assign(nm, 0.0);
  g.val_w2.assign(nm, 0.0);
  g.val_b2.assign(net.n_out, 0.0);
  if (through_d1) {
    g.d1_w1.assign(nm, 0.0);
    g.d1_b1.assign(nm, 0.0);
    g.d1_w2.assign(nm, 0.0);
    g.d1_b2.assign(net.n_out, 0.0);
  }
  const bool f_w1 = net.frozen & TW1, f_b1 = net.frozen & TB1;
  const bool f_w2 = net.frozen & TW2, f_b2 = net.frozen & TB2;
  for (int k = 0; k < net.n_hidden; ++k) {
    const Real wk = net.w1[k];
    const ActDerivs ad = act_eval(net, wk * x + net.b1[k], through_d1 ? 2 : 1);
    for (int j = 0; j < net.n_out; ++j) {
      const std::size_t jk = static_cast<std::size_t>(j) * net.n_hidden + k;
      const Real w = net.w2_at(j, k);
      if (!f_w1) g.val_w1[jk] = w * ad.a1 * x;
      if (!f_b1) g.val_b1[jk] = w * ad.a1;
      if (!f_w2) g.val_w2[jk] = ad.a;
      if (through_d1) {
        if (!f_w1) g.d1_w1[jk] = w * (ad.a1 + wk * x * ad.a2);
        if (!f_b1) g.d1_b1[jk] = w * wk * ad.a2;
        if (!f_w2) g.d1_w2[jk] = wk * ad.a1;
      }
    }
  }
  if (!f_b2)
    for (int j = 0; j < net.n_out; ++j) g.val_b2[j] = 1.0;
  return g;
}

// ---------------------------------------------------------------------------
// Batched hidden-layer activations over a fixed point set. Training loops
// reuse these tables whenever the hidden layer is frozen for a stage.
// ---------------------------------------------------------------------------

struct HiddenTable {
  int n_pts = 0, n_hidden = 0, max_order = 0;
  std::vector<Real> a, a1, a2, a3; // each [n_pts][n_hidden] when present

  const Real* row_a(int i) const { return a.data() + static_cast<std::size_t>(i) * n_hidden; }
  const Real* row_a1(int i) const { return a1.data() + static_cast<std::size_t>(i) * n_hidden; }
  const Real* row_a2(int i) const { return a2.data() + static_cast<std::size_t>(i) * n_hidden; }
  const Real* row_a3(int i) const { return a3.data() + static_cast<std::size_t>(i) * n_hidden; }
};

inline HiddenTable build_hidden_table(const ShallowNet& net, std::span<const Real> xs,
                                      int max_order) {
  HiddenTable t;
  t.n_pts = static_cast<int>(xs.size());
  t.n_hidden = net.n_hidden;
  t.max_order = max_order;
  const std::size_t nm = static_cast<std::size_t>(t.n_pts) * t.n_hidden;
  t.a.resize(nm);
  if (max_order >= 1) t.a1.resize(nm);
  if (max_order >= 2) t.a2.resize(nm);
  if (max_order >= 3) t.a3.resize(nm);
  for (int i = 0; i < t.n_pts; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * t.n_hidden;
    for (int k = 0; k < t.n_hidden; ++k) {
      const ActDerivs ad = act_eval(net, net.w1[k] * xs[i] + net.b1[k], max_order);
      t.a[base + k] = ad.a;
      if (max_order >= 1) t.a1[base + k] = ad.a1;
      if (max_order >= 2) t.a2[base + k] = ad.a2;
      if (max_order >= 3) t.a3[base + k] = ad.a3;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Flat parameter views over a family of nets, honouring freeze masks.
// ---------------------------------------------------------------------------

struct ParamPack {
  struct Entry {
    int net;
    unsigned tensor;
    std::size_t offset; // into the flat vector
    std::size_t size;
  };
  std::vector<Entry> entries;
  std::size_t total = 0;

  static ParamPack build(const std::vector<ShallowNet>& nets) {
    ParamPack p;
    for (std::size_t n = 0; n < nets.size(); ++n) {
      const ShallowNet& net = nets[n];
      auto add = [&](unsigned tensor, std::size_t size) {
        if (net.frozen & tensor) return;
        p.entries.push_back({static_cast<int>(n), tensor, p.total, size});
        p.total += size;
      };
      add(TW1, net.w1.size());
      add(TB1, net.b1.size());
      add(TW2, net.w2.size());
      add(TB2, net.b2.size());
    }
    return p;
  }

  static const std::vector<Real>& tensor_of(const ShallowNet& net, unsigned t) {
    switch (t) {
    case TW1: return net.w1;
    case TB1: return net.b1;
    case TW2: return net.w2;
    default: return net.b2;
    }
  }
  static std::vector<Real>& tensor_of(ShallowNet& net, unsigned t) {
    switch (t) {
    case TW1: return net.w1;
    case TB1: return net.b1;
    case TW2: return net.w2;
    default: return net.b2;
    }
  }

  std::vector<Real> gather(const std::vector<ShallowNet>& nets) const {
    std::vector<Real> flat(total);
    for (const Entry& e : entries) {
      const auto& t = tensor_of(nets[e.net], e.tensor);
      std::copy(t.begin(), t.end(), flat.begin() + e.offset);
    }
    return flat;
  }

  void scatter(std::vector<ShallowNet>& nets, std::span<const Real> flat) const {
    for (const Entry& e : entries) {
      auto& t = tensor_of(nets[e.net], e.tensor);
      std::copy(flat.begin() + e.offset, flat.begin() + e.offset + e.size, t.begin());
    }
  }
};

} // namespace spinn
