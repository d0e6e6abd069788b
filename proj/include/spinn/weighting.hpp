#pragma once

// Loss construction and weighting for ODE training: composite residual +
// initial-condition loss, operator detaching, causal down-weighting by
// cumulative upstream loss, two gradient-normalization variants, residual
// slope emphasis (D2), and the two EMA division schemes (PSBW over |u|, RR
// over |N|). Gradients are accumulated in closed form against a flat
// parameter view.
//
// Composition order when several schemes are active: RR/PSBW division first,
// then causal multiplication, then the D2 factor; the mean over points and
// the lambda-weighted sum come last.

#include "spinn/net.hpp"
#include "spinn/parallel.hpp"
#include "spinn/problems.hpp"

namespace spinn {

enum SchemeFlag : unsigned {
  SDetach = 1u,
  SCausal = 2u,
  SGn1 = 4u,
  SGn2 = 8u,
  SD2 = 16u,
  SPsbw = 32u,
  SRr = 64u,
};

inline unsigned scheme_from_name(const std::string& s) {
  if (s == "detach") return SDetach;
  if (s == "causal") return SCausal;
  if (s == "gn1") return SGn1;
  if (s == "gn2") return SGn2;
  if (s == "d2") return SD2;
  if (s == "psbw") return SPsbw;
  if (s == "rr") return SRr;
  throw std::invalid_argument("unknown weighting scheme: " + s);
}

struct WeightState {
  int n_components = 1;
  int n_points = 0;
  std::vector<Real> lambda_ic, lambda_r; // [K]
  std::vector<Real> beta;                // [K]; lambda_ic = beta * lambda_r coupling
  Real causal_eps = 1e-8;
  Real causal_eps_x = 1e-8; // second axis, used by the PDE loss
  Real causal_delta_w = 0.99;
  Real ema_alpha = 0.9;
  Real psbw_gamma = 0.9;
  Real rr_gamma = 0.99;
  Real eps0 = 1e-8;
  unsigned active = 0;
  std::vector<Real> psbw_v_ic; // [K]
  std::vector<Real> psbw_v_r;  // [K*N]
  std::vector<Real> rr_nu;     // [K*N]
  bool gn_warning = false;     // set when a zero-denominator update was skipped

  static WeightState make(int n_components, int n_points, std::span<const Real> initial,
                          Real span, Real lambda_r0 = 1.0, bool beta_coupled = false) {
    WeightState s;
    s.n_components = n_components;
    s.n_points = n_points;
    s.lambda_r.assign(n_components, lambda_r0);
    s.beta.assign(n_components, static_cast<Real>(n_points) / span);
    s.lambda_ic.assign(n_components, lambda_r0);
    if (beta_coupled)
      for (int k = 0; k < n_components; ++k) s.lambda_ic[k] = s.beta[k] * s.lambda_r[k];
    s.psbw_v_ic.assign(initial.begin(), initial.end());
    for (Real& v : s.psbw_v_ic) v = std::abs(v);
    s.psbw_v_r.assign(static_cast<std::size_t>(n_components) * n_points, 1.0);
    s.rr_nu.assign(static_cast<std::size_t>(n_components) * n_points, 1.0);
    return s;
  }
};

/// Per-point causal weights from detached per-point losses (row-major
/// [K][N], points sorted along the axis). w_1 = 1. The doubling trigger uses
/// the unsquared cumulative loss, so eps keeps ratcheting until the weight
/// profile forms a genuine front (weights near zero past the unresolved
/// region) rather than stalling at a ~1% modulation.
inline std::vector<Real> causal_weights_core(std::span<const Real> point_losses, int K, int N,
                                             Real& eps, Real delta_w, bool update_eps) {
  std::vector<Real> w(N, 1.0);
  std::vector<Real> cum(K, 0.0);
  Real min_gate = 1.0;
  for (int i = 0; i < N; ++i) {
    if (i == 0) {
      w[0] = 1.0;
    } else {
      Real best = -1.0;
      Real gate = -1.0;
      for (int k = 0; k < K; ++k) {
        const Real s = cum[k] / (i + 1); // (1/i) * sum_{m=1}^{i-1} in 1-based indexing
        best = std::max(best, std::exp(-eps * s * s));
        gate = std::max(gate, std::exp(-eps * s));
      }
      w[i] = best;
      min_gate = std::min(min_gate, gate);
    }
    for (int k = 0; k < K; ++k) cum[k] += point_losses[static_cast<std::size_t>(k) * N + i];
  }
  if (update_eps && min_gate > delta_w) eps *= 2.0;
  return w;
}

inline std::vector<Real> causal_weights(WeightState& state, std::span<const Real> point_losses,
                                        bool update_eps = true) {
  return causal_weights_core(point_losses, state.n_components, state.n_points,
                             state.causal_eps, state.causal_delta_w, update_eps);
}

/// Global two-weight normalization; shares one lambda_ic and one lambda_r
/// across components. Returns false (and leaves state untouched) on a zero
/// denominator.
inline bool gn1_update(WeightState& state, std::span<const Real> ic_norms,
                       std::span<const Real> r_norms) {
  Real total = 0.0, sum_ic = 0.0, sum_r = 0.0;
  for (int k = 0; k < state.n_components; ++k) {
    total += ic_norms[k] + r_norms[k];
    sum_ic += ic_norms[k];
    sum_r += r_norms[k];
  }
  if (sum_ic == 0.0 || sum_r == 0.0) {
    state.gn_warning = true;
    return false;
  }
  const Real hat_ic = total / sum_ic;
  const Real hat_r = total / sum_r;
  const Real a = state.ema_alpha;
  const Real new_ic = a * state.lambda_ic[0] + (1.0 - a) * hat_ic;
  const Real new_r = a * state.lambda_r[0] + (1.0 - a) * hat_r;
  std::fill(state.lambda_ic.begin(), state.lambda_ic.end(), new_ic);
  std::fill(state.lambda_r.begin(), state.lambda_r.end(), new_r);
  return true;
}

/// Per-component normalization with the beta coupling lambda_ic = beta *
/// lambda_r. Components with a zero denominator keep their previous value.
inline bool gn2_update(WeightState& state, std::span<const Real> ic_norms,
                       std::span<const Real> r_norms) {
  const int K = state.n_components;
  Real total = 0.0;
  for (int k = 0; k < K; ++k) total += state.beta[k] * ic_norms[k] + r_norms[k];
  bool all_ok = true;
  for (int p = 0; p < K; ++p) {
    const Real den = state.beta[p] * ic_norms[p] + r_norms[p];
    if (den == 0.0) {
      state.gn_warning = true;
      all_ok = false;
      continue;
    }
    const Real hat = total / (2.0 * K * den);
    state.lambda_r[p] = state.ema_alpha * state.lambda_r[p] + (1.0 - state.ema_alpha) * hat;
    state.lambda_ic[p] = state.beta[p] * state.lambda_r[p];
  }
  return all_ok;
}

/// EMA update of the predicted-solution buffers (ic and residual points).
inline void psbw_update(WeightState& state, std::span<const Real> abs_u_ic,
                        std::span<const Real> abs_u_points) {
  const Real g = state.psbw_gamma;
  for (int k = 0; k < state.n_components; ++k)
    state.psbw_v_ic[k] = g * state.psbw_v_ic[k] + (1.0 - g) * abs_u_ic[k];
  for (std::size_t i = 0; i < state.psbw_v_r.size(); ++i)
    state.psbw_v_r[i] = g * state.psbw_v_r[i] + (1.0 - g) * abs_u_points[i];
}

/// EMA update of the operator-magnitude buffers.
inline void rr_update(WeightState& state, std::span<const Real> abs_n_points) {
  const Real g = state.rr_gamma;
  for (std::size_t i = 0; i < state.rr_nu.size(); ++i)
    state.rr_nu[i] = g * state.rr_nu[i] + (1.0 - g) * abs_n_points[i];
}

inline void rr_reset(WeightState& state) {
  std::fill(state.rr_nu.begin(), state.rr_nu.end(), 1.0);
}

struct LossTerms {
  std::vector<Real> l_ic;     // [K]
  std::vector<Real> l_r;      // [K]
  std::vector<Real> point_sq; // [K*N] squared residuals before weighting
  std::vector<Real> causal_w; // [N] (all ones when causal is off)
  Real total = 0.0;
};

struct UpdateFlags {
  bool causal_eps = false;
  bool psbw = false;
  bool rr = false;
  bool rr_reset = false;
};

// ---------------------------------------------------------------------------
// Loss evaluator over a fixed collocation set. One instance per training
// stage; hidden-layer activation tables are cached while W1/B1 are frozen.
// ---------------------------------------------------------------------------

class OdeLossEvaluator {
public:
  OdeLossEvaluator(const OdeSystem& sys, std::vector<ShallowNet>* nets,
                   std::vector<Real> points, bool hidden_static)
      : sys_(sys), nets_(nets), points_(std::move(points)), hidden_static_(hidden_static) {
    for (std::size_t i = 1; i < points_.size(); ++i)
      if (!(points_[i] > points_[i - 1]))
        throw std::invalid_argument("loss evaluator: collocation points must be sorted");
    if (points_.front() < sys_.x_lo - 1e-12 || points_.back() > sys_.x_hi + 1e-12)
      throw std::invalid_argument("loss evaluator: point outside domain");
    rows_ = points_;
    rows_.push_back(sys_.x_lo); // extra row evaluates the initial condition
  }

  const std::vector<Real>& points() const { return points_; }

  /// When set, the per-point scales (division buffers, causal weights, D2
  /// factors) are computed once and then held fixed across calls, making the
  /// loss an ordinary smooth function of the parameters.
  void set_frozen_scales(bool on) {
    freeze_scales_ = on;
    scales_valid_ = false;
  }

  /// Full loss (and gradient when grad != nullptr, laid out per pack).
  LossTerms evaluate(WeightState& state, const UpdateFlags& flags,
                     std::vector<Real>* grad = nullptr, const ParamPack* pack = nullptr) {
    const int K = sys_.n_components;
    const int N = static_cast<int>(points_.size());
    if (state.n_components != K || state.n_points != N)
      throw std::invalid_argument("loss evaluator: weight state shape mismatch");
    refresh_tables();
    compute_values(state.active);

    LossTerms out;
    out.point_sq.assign(static_cast<std::size_t>(K) * N, 0.0);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < N; ++i)
        out.point_sq[idx(k, i)] = resid_[idx(k, i)] * resid_[idx(k, i)];

    const bool reuse = freeze_scales_ && scales_valid_;
    if (!reuse) {
      // Per-point scale: division schemes first.
      if (state.active & SRr) {
        if (flags.rr_reset) rr_reset(state);
        if (flags.rr) rr_update(state, abs_n_);
      }
      if (state.active & SPsbw) {
        if (flags.psbw) {
          std::vector<Real> abs_ic(K);
          for (int k = 0; k < K; ++k) abs_ic[k] = std::abs(u_ic_[k]);
          psbw_update(state, abs_ic, abs_u_);
        }
      }
      scale_.assign(static_cast<std::size_t>(K) * N, 1.0);
      for (int k = 0; k < K; ++k)
        for (int i = 0; i < N; ++i) {
          Real& s = scale_[idx(k, i)];
          if (state.active & SRr) {
            const Real d = state.rr_nu[idx(k, i)] + state.eps0;
            s /= d * d;
          } else if (state.active & SPsbw) {
            const Real d = state.psbw_v_r[idx(k, i)] + state.eps0;
            s /= d * d;
          }
        }

      // Causal weights from the post-division detached losses.
      if (state.active & SCausal) {
        std::vector<Real> divided(static_cast<std::size_t>(K) * N);
        for (std::size_t i = 0; i < divided.size(); ++i)
          divided[i] = scale_[i] * out.point_sq[i];
        causal_w_ = causal_weights(state, divided, flags.causal_eps);
        for (int k = 0; k < K; ++k)
          for (int i = 0; i < N; ++i) scale_[idx(k, i)] *= causal_w_[i];
      } else {
        causal_w_.assign(N, 1.0);
      }

      if (state.active & SD2) {
        compute_d2_factors();
        for (std::size_t i = 0; i < scale_.size(); ++i) scale_[i] *= d2_factor_[i];
      }
      scales_valid_ = true;
    }
    out.causal_w = causal_w_;

    // Means and the weighted total.
    out.l_ic.assign(K, 0.0);
    out.l_r.assign(K, 0.0);
    std::vector<Real> weighted(N);
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < N; ++i) weighted[i] = scale_[idx(k, i)] * out.point_sq[idx(k, i)];
      out.l_r[k] = pairwise_sum(weighted) / N;
      // The ic term has no operator value; it is divided by the
      // predicted-solution buffer when PSBW runs (also alongside RR, which
      // then takes precedence on the residual term).
      Real ic_scale = 1.0;
      if (state.active & SPsbw) {
        const Real d = state.psbw_v_ic[k] + state.eps0;
        ic_scale = 1.0 / (d * d);
      }
      const Real diff = u_ic_[k] - sys_.initial[k];
      out.l_ic[k] = ic_scale * diff * diff;
      ic_scale_[k] = ic_scale;
      if (!std::isfinite(out.l_r[k]))
        throw numeric_error("loss non-finite: residual term of component " + std::to_string(k));
      if (!std::isfinite(out.l_ic[k]))
        throw numeric_error("loss non-finite: ic term of component " + std::to_string(k));
    }
    Real total = 0.0;
    for (int k = 0; k < K; ++k)
      total += state.lambda_ic[k] * out.l_ic[k] + state.lambda_r[k] * out.l_r[k];
    out.total = total;
    if (!std::isfinite(total)) throw numeric_error("loss non-finite: weighted total");

    if (grad) {
      if (!pack) throw std::invalid_argument("evaluate: gradient requested without a pack");
      accumulate_gradient(state, *grad, *pack, -1, true);
    }
    return out;
  }

  /// Norms of the per-term gradients (no lambda factors), for GN updates.
  /// Uses the scales of the most recent evaluate() call.
  void term_gradient_norms(const WeightState& state, const ParamPack& pack,
                           std::vector<Real>& ic_norms, std::vector<Real>& r_norms) {
    const int K = sys_.n_components;
    ic_norms.assign(K, 0.0);
    r_norms.assign(K, 0.0);
    std::vector<Real> g(pack.total);
    for (int k = 0; k < K; ++k) {
      accumulate_gradient(state, g, pack, k, false); // residual term of component k
      r_norms[k] = l2_norm(g);
      accumulate_gradient(state, g, pack, k + K, false); // ic term of component k
      ic_norms[k] = l2_norm(g);
    }
  }

  /// Residual values only (identical with detach on or off).
  std::vector<Real> residual_values(unsigned active_hint = 0) {
    refresh_tables();
    compute_values(active_hint);
    return resid_;
  }

  /// Detached emphasis factors (1 + |dR/dx|^2), row-major [K][N].
  std::vector<Real> d2_factor_values() {
    refresh_tables();
    compute_values(SD2);
    compute_d2_factors();
    return d2_factor_;
  }

private:
  std::size_t idx(int k, int i) const {
    return static_cast<std::size_t>(k) * points_.size() + i;
  }

  void refresh_tables() {
    if (!tables_.empty() && hidden_static_) return;
    tables_.clear();
    const int order = 2;
    for (const ShallowNet& net : *nets_) tables_.push_back(build_hidden_table(net, rows_, order));
  }

  // Values, first derivatives, residuals, operator magnitudes and (optional)
  // second derivatives / Jacobians at every collocation point.
  void compute_values(unsigned active) {
    const int K = sys_.n_components;
    const int N = static_cast<int>(points_.size());
    const bool need_d2 = (active & SD2) != 0;
    const bool need_jac = need_d2 || !(active & SDetach);
    u_.assign(static_cast<std::size_t>(K) * N, 0.0);
    d1_.assign(static_cast<std::size_t>(K) * N, 0.0);
    resid_.assign(static_cast<std::size_t>(K) * N, 0.0);
    abs_n_.assign(static_cast<std::size_t>(K) * N, 0.0);
    abs_u_.assign(static_cast<std::size_t>(K) * N, 0.0);
    if (need_d2) u2_.assign(static_cast<std::size_t>(K) * N, 0.0);
    if (need_jac) jac_.assign(static_cast<std::size_t>(K) * K * N, 0.0);
    if (need_d2) ndx_.assign(static_cast<std::size_t>(K) * N, 0.0);
    u_ic_.assign(K, 0.0);
    ic_scale_.assign(K, 1.0);
    detach_ = (active & SDetach) != 0;

    parallel_for(static_cast<std::size_t>(N), 64, [&](std::size_t i) {
      std::vector<Real> uu(K), nv(K);
      for (int m = 0; m < K; ++m) {
        const ShallowNet& net = (*nets_)[m];
        const HiddenTable& t = tables_[m];
        const Real* a = t.row_a(static_cast<int>(i));
        const Real* a1 = t.row_a1(static_cast<int>(i));
        const Real* a2 = t.n_pts ? t.row_a2(static_cast<int>(i)) : nullptr;
        Real val = net.b2[0], der = 0.0, der2 = 0.0;
        for (int k = 0; k < net.n_hidden; ++k) {
          const Real w = net.w2[k];
          val += w * a[k];
          der += w * net.w1[k] * a1[k];
          if (need_d2) der2 += w * net.w1[k] * net.w1[k] * a2[k];
        }
        u_[idx(m, static_cast<int>(i))] = val;
        d1_[idx(m, static_cast<int>(i))] = der;
        if (need_d2) u2_[idx(m, static_cast<int>(i))] = der2;
        uu[m] = val;
      }
      const Real x = points_[i];
      sys_.rhs_n(uu, x, nv);
      for (int m = 0; m < K; ++m) {
        resid_[idx(m, static_cast<int>(i))] = d1_[idx(m, static_cast<int>(i))] + nv[m];
        abs_n_[idx(m, static_cast<int>(i))] = std::abs(nv[m]);
        abs_u_[idx(m, static_cast<int>(i))] = std::abs(uu[m]);
      }
      if (need_jac)
        sys_.rhs_n_jac(uu, x, std::span<Real>(jac_.data() + i * K * K, K * K));
      if (need_d2) {
        std::vector<Real> dn(K);
        sys_.rhs_n_dx(uu, x, dn);
        for (int m = 0; m < K; ++m) ndx_[idx(m, static_cast<int>(i))] = dn[m];
      }
    });

    // Initial-condition row.
    for (int m = 0; m < K; ++m) {
      const ShallowNet& net = (*nets_)[m];
      const HiddenTable& t = tables_[m];
      const Real* a = t.row_a(N);
      Real val = net.b2[0];
      for (int k = 0; k < net.n_hidden; ++k) val += net.w2[k] * a[k];
      u_ic_[m] = val;
    }
  }

  // (1 + |dR/dx|^2) per point per component, from the analytic chain
  // dR/dx = u'' + J_N u' + dN/dx. Stored detached.
  void compute_d2_factors() {
    const int K = sys_.n_components;
    const int N = static_cast<int>(points_.size());
    d2_factor_.assign(static_cast<std::size_t>(K) * N, 1.0);
    for (int i = 0; i < N; ++i) {
      const Real* J = jac_.data() + static_cast<std::size_t>(i) * K * K;
      for (int m = 0; m < K; ++m) {
        Real slope = u2_[idx(m, i)] + ndx_[idx(m, i)];
        for (int l = 0; l < K; ++l) slope += J[m * K + l] * d1_[idx(l, i)];
        d2_factor_[idx(m, i)] = 1.0 + slope * slope;
      }
    }
  }

  // Gradient of the weighted total (term = -1), of one component's residual
  // term (term in [0, K)), or of one component's ic term (term in [K, 2K)).
  // with_lambda applies the lambda weights (used for the total only).
  void accumulate_gradient(const WeightState& state, std::vector<Real>& grad,
                           const ParamPack& pack, int term, bool with_lambda) {
    const int K = sys_.n_components;
    const int N = static_cast<int>(points_.size());
    grad.assign(pack.total, 0.0);
    const bool do_resid = term < 0 || term < K;
    const bool do_ic = term < 0 || term >= K;
    const int only_k = term < 0 ? -1 : (term < K ? term : term - K);

    // Cotangent on each residual.
    cot_.assign(static_cast<std::size_t>(K) * N, 0.0);
    if (do_resid)
      for (int k = 0; k < K; ++k) {
        if (only_k >= 0 && k != only_k) continue;
        const Real lam = with_lambda ? state.lambda_r[k] : 1.0;
        for (int i = 0; i < N; ++i)
          cot_[idx(k, i)] = lam * (2.0 / N) * scale_[idx(k, i)] * resid_[idx(k, i)];
      }

    // Per-entry offsets into the flat gradient.
    struct Off {
      std::ptrdiff_t w1 = -1, b1 = -1, w2 = -1, b2 = -1;
    };
    std::vector<Off> offs(nets_->size());
    for (const ParamPack::Entry& e : pack.entries) {
      if (e.tensor == TW1) offs[e.net].w1 = static_cast<std::ptrdiff_t>(e.offset);
      if (e.tensor == TB1) offs[e.net].b1 = static_cast<std::ptrdiff_t>(e.offset);
      if (e.tensor == TW2) offs[e.net].w2 = static_cast<std::ptrdiff_t>(e.offset);
      if (e.tensor == TB2) offs[e.net].b2 = static_cast<std::ptrdiff_t>(e.offset);
    }

    const std::size_t block = 64;
    const std::size_t n_blocks = (static_cast<std::size_t>(N) + block - 1) / block;
    block_grads_.assign(n_blocks, {});
    for (auto& bg : block_grads_) bg.assign(pack.total, 0.0);

    ThreadPool::instance().for_blocks(
        static_cast<std::size_t>(N), block, [&](std::size_t b, std::size_t lo, std::size_t hi) {
          std::vector<Real>& g = block_grads_[b];
          for (std::size_t i = lo; i < hi; ++i) {
            const Real x = points_[i];
            const Real* J = jac_.empty() ? nullptr : jac_.data() + i * K * K;
            for (int m = 0; m < K; ++m) {
              const Real cd = cot_[idx(m, static_cast<int>(i))];
              Real cv = 0.0;
              if (!detach_ && J)
                for (int l = 0; l < K; ++l) cv += cot_[idx(l, static_cast<int>(i))] * J[l * K + m];
              if (cd == 0.0 && cv == 0.0) continue;
              add_point_grad(m, static_cast<int>(i), x, cv, cd, offs[m], g);
            }
          }
        });
    for (const auto& bg : block_grads_)
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += bg[j];

    if (do_ic) {
      for (int m = 0; m < K; ++m) {
        if (only_k >= 0 && m != only_k) continue;
        const Real lam = with_lambda ? state.lambda_ic[m] : 1.0;
        const Real cv = lam * ic_scale_[m] * 2.0 * (u_ic_[m] - sys_.initial[m]);
        if (cv != 0.0) add_point_grad(m, N, sys_.x_lo, cv, 0.0, offs[m], grad);
      }
    }
  }

  // One point's contribution: cv couples to the value, cd to the first
  // input-derivative.
  void add_point_grad(int m, int row, Real x, Real cv, Real cd, const auto& off,
                      std::vector<Real>& g) {
    const ShallowNet& net = (*nets_)[m];
    const HiddenTable& t = tables_[m];
    const Real* a = t.row_a(row);
    const Real* a1 = t.row_a1(row);
    const Real* a2 = t.row_a2(row);
    const int n = net.n_hidden;
    if (off.w2 >= 0) {
      Real* gw2 = g.data() + off.w2;
      for (int k = 0; k < n; ++k) gw2[k] += cv * a[k] + cd * net.w1[k] * a1[k];
    }
    if (off.b2 >= 0) g[off.b2] += cv;
    if (off.w1 >= 0) {
      Real* gw1 = g.data() + off.w1;
      for (int k = 0; k < n; ++k)
        gw1[k] += net.w2[k] * (cv * x * a1[k] + cd * (a1[k] + net.w1[k] * x * a2[k]));
    }
    if (off.b1 >= 0) {
      Real* gb1 = g.data() + off.b1;
      for (int k = 0; k < n; ++k)
        gb1[k] += net.w2[k] * (cv * a1[k] + cd * net.w1[k] * a2[k]);
    }
  }

  const OdeSystem& sys_;
  std::vector<ShallowNet>* nets_;
  std::vector<Real> points_, rows_;
  bool hidden_static_ = false;
  bool detach_ = false;
  bool freeze_scales_ = false;
  bool scales_valid_ = false;
  std::vector<HiddenTable> tables_;
  std::vector<Real> u_, d1_, u2_, resid_, abs_n_, abs_u_, jac_, ndx_;
  std::vector<Real> scale_, d2_factor_, cot_, u_ic_, ic_scale_, causal_w_;
  std::vector<std::vector<Real>> block_grads_;
};

/// One-shot loss assembly over a fresh evaluator (module-level entry point;
/// training loops keep a persistent evaluator instead).
inline LossTerms assemble_loss(std::vector<ShallowNet>& nets, const OdeSystem& sys,
                               std::span<const Real> points, WeightState& state,
                               const UpdateFlags& flags = {}, std::vector<Real>* grad = nullptr,
                               const ParamPack* pack = nullptr) {
  OdeLossEvaluator ev(sys, &nets, std::vector<Real>(points.begin(), points.end()), false);
  return ev.evaluate(state, flags, grad, pack);
}

/// Residual values per point per component; bit-identical with detach on or
/// off (detaching changes gradients only).
inline std::vector<Real> residuals(std::vector<ShallowNet>& nets, const OdeSystem& sys,
                                   std::span<const Real> points) {
  OdeLossEvaluator ev(sys, &nets, std::vector<Real>(points.begin(), points.end()), false);
  return ev.residual_values();
}

/// Multiplicative emphasis factors (1 + |dR/dx|^2), detached, row-major
/// [K][N].
inline std::vector<Real> d2_factors(std::vector<ShallowNet>& nets, const OdeSystem& sys,
                                    std::span<const Real> points) {
  OdeLossEvaluator ev(sys, &nets, std::vector<Real>(points.begin(), points.end()), false);
  return ev.d2_factor_values();
}

} // namespace spinn
