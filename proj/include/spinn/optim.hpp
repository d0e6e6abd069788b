#pragma once

// Full-batch parameter updaters over flat parameter vectors: bias-corrected
// Adam with an optional step learning-rate schedule, and LBFGS (two-loop
// recursion, strong-Wolfe line search). Freeze masks are applied upstream:
// frozen tensors are simply absent from the flat vector.

#include "spinn/math.hpp"

namespace spinn {

using LossGradFn = std::function<Real(std::span<const Real>, std::span<Real>)>;

struct AdamState {
  Real lr = 1e-3;
  Real beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  enum class Schedule { Constant, Step } schedule = Schedule::Constant;
  Real decay = 0.9;
  long decay_every = 5000;
  long step = 0;
  std::vector<Real> m, v;

  Real current_lr() const {
    if (schedule == Schedule::Constant) return lr;
    return lr * std::pow(decay, static_cast<Real>(step / decay_every));
  }
};

inline void adam_step(AdamState& st, std::vector<Real>& params, std::span<const Real> grad) {
  if (grad.size() != params.size())
    throw std::invalid_argument("adam_step: gradient/parameter size mismatch");
  if (st.m.empty()) {
    st.m.assign(params.size(), 0.0);
    st.v.assign(params.size(), 0.0);
  }
  for (Real g : grad)
    if (!std::isfinite(g)) throw numeric_error("adam_step: non-finite gradient entry");
  const Real lr_t = st.current_lr();
  st.step += 1;
  const Real bc1 = 1.0 - std::pow(st.beta1, static_cast<Real>(st.step));
  const Real bc2 = 1.0 - std::pow(st.beta2, static_cast<Real>(st.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grad[i];
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grad[i] * grad[i];
    const Real mhat = st.m[i] / bc1;
    const Real vhat = st.v[i] / bc2;
    params[i] -= lr_t * mhat / (std::sqrt(vhat) + st.eps);
  }
}

// ---------------------------------------------------------------------------
// LBFGS
// ---------------------------------------------------------------------------

struct LbfgsOptions {
  int history = 20;
  int max_iterations = 5000;
  Real grad_tol = 1e-10;
  Real c1 = 1e-4;
  Real c2 = 0.9;
  int max_line_search_evals = 60;
  // Invoked after every accepted iterate. When set, f and the gradient are
  // re-evaluated afterwards, so callers may mutate the objective (weight
  // ratchets, EMA buffers) between iterations while every line search still
  // sees a fixed function.
  std::function<void()> on_iteration;
};

struct LbfgsResult {
  int iterations = 0;
  long n_evals = 0;
  bool converged = false;
  bool line_search_failed = false;
  Real final_loss = 0.0;
};

namespace detail {

inline Real dot(std::span<const Real> a, std::span<const Real> b) {
  Real s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Cubic minimizer of the interpolant through (a, fa, dfa) and (b, fb, dfb),
// clipped into the interior of [min(a,b), max(a,b)].
inline Real cubic_min(Real a, Real fa, Real dfa, Real b, Real fb, Real dfb) {
  const Real d1 = dfa + dfb - 3.0 * (fa - fb) / (a - b);
  const Real disc = d1 * d1 - dfa * dfb;
  const Real lo = std::min(a, b), hi = std::max(a, b);
  Real cand;
  if (disc < 0.0) {
    cand = 0.5 * (a + b);
  } else {
    const Real d2 = std::copysign(std::sqrt(disc), b - a);
    cand = b - (b - a) * (dfb + d2 - d1) / (dfb - dfa + 2.0 * d2);
  }
  if (!std::isfinite(cand)) cand = 0.5 * (a + b);
  const Real margin = 0.1 * (hi - lo);
  return std::clamp(cand, lo + margin, hi - margin);
}

} // namespace detail

/// Minimizes f by LBFGS. `params` is updated in place; accepted iterates
/// never increase the loss (guaranteed by the sufficient-decrease condition).
inline LbfgsResult lbfgs_minimize(const LbfgsOptions& opt, const LossGradFn& f,
                                  std::vector<Real>& params) {
  const std::size_t n = params.size();
  LbfgsResult res;
  std::vector<Real> x = params, g(n), x_new(n), g_new(n), d(n);
  Real fx = f(x, g);
  res.n_evals = 1;
  std::vector<Real> best_x = x;
  Real best_f = fx;

  if (l2_norm(g) <= opt.grad_tol) {
    res.converged = true;
    res.final_loss = fx;
    return res;
  }

  std::vector<std::vector<Real>> s_hist, y_hist;
  std::vector<Real> rho_hist;
  std::vector<Real> alpha_buf;

  auto two_loop = [&]() {
    d.assign(g.begin(), g.end());
    const int m = static_cast<int>(s_hist.size());
    alpha_buf.assign(m, 0.0);
    for (int i = m - 1; i >= 0; --i) {
      alpha_buf[i] = rho_hist[i] * detail::dot(s_hist[i], d);
      for (std::size_t j = 0; j < n; ++j) d[j] -= alpha_buf[i] * y_hist[i][j];
    }
    if (m > 0) {
      const Real gamma = detail::dot(s_hist[m - 1], y_hist[m - 1]) /
                         detail::dot(y_hist[m - 1], y_hist[m - 1]);
      for (Real& v : d) v *= gamma;
    }
    for (int i = 0; i < m; ++i) {
      const Real beta = rho_hist[i] * detail::dot(y_hist[i], d);
      for (std::size_t j = 0; j < n; ++j) d[j] += s_hist[i][j] * (alpha_buf[i] - beta);
    }
    for (Real& v : d) v = -v;
  };

  // Strong-Wolfe line search along d. On success x/g/fx hold the accepted
  // point and the return value is true.
  auto line_search = [&](Real alpha_init) -> bool {
    const Real phi0 = fx;
    const Real dphi0 = detail::dot(g, d);
    if (dphi0 >= 0.0) return false; // not a descent direction
    auto eval = [&](Real alpha, Real& phi, Real& dphi) {
      for (std::size_t j = 0; j < n; ++j) x_new[j] = x[j] + alpha * d[j];
      phi = f(x_new, g_new);
      ++res.n_evals;
      dphi = detail::dot(g_new, d);
    };
    auto accept = [&](Real alpha, Real phi) {
      x.swap(x_new);
      g.swap(g_new);
      fx = phi;
      (void)alpha;
    };
    int evals = 0;
    auto zoom = [&](Real lo, Real f_lo, Real df_lo, Real hi, Real f_hi, Real df_hi) -> bool {
      for (; evals < opt.max_line_search_evals; ++evals) {
        const Real alpha = detail::cubic_min(lo, f_lo, df_lo, hi, f_hi, df_hi);
        Real phi, dphi;
        eval(alpha, phi, dphi);
        if (phi > phi0 + opt.c1 * alpha * dphi0 || phi >= f_lo) {
          hi = alpha;
          f_hi = phi;
          df_hi = dphi;
        } else {
          if (std::abs(dphi) <= -opt.c2 * dphi0) {
            accept(alpha, phi);
            return true;
          }
          if (dphi * (hi - lo) >= 0.0) {
            hi = lo;
            f_hi = f_lo;
            df_hi = df_lo;
          }
          lo = alpha;
          f_lo = phi;
          df_lo = dphi;
        }
        if (std::abs(hi - lo) < 1e-16 * std::max<Real>(1.0, std::abs(lo))) break;
      }
      return false;
    };

    Real alpha_prev = 0.0, phi_prev = phi0, dphi_prev = dphi0;
    Real alpha = alpha_init;
    const Real alpha_max = 1e10;
    for (; evals < opt.max_line_search_evals; ++evals) {
      Real phi, dphi;
      eval(alpha, phi, dphi);
      if (phi > phi0 + opt.c1 * alpha * dphi0 || (evals > 0 && phi >= phi_prev))
        return zoom(alpha_prev, phi_prev, dphi_prev, alpha, phi, dphi);
      if (std::abs(dphi) <= -opt.c2 * dphi0) {
        accept(alpha, phi);
        return true;
      }
      if (dphi >= 0.0) return zoom(alpha, phi, dphi, alpha_prev, phi_prev, dphi_prev);
      alpha_prev = alpha;
      phi_prev = phi;
      dphi_prev = dphi;
      alpha = std::min(2.0 * alpha, alpha_max);
    }
    return false;
  };

  bool restarted = false;
  while (res.iterations < opt.max_iterations) {
    two_loop();
    const Real alpha0 =
        s_hist.empty() ? std::min<Real>(1.0, 1.0 / std::max<Real>(1e-12, l2_norm(g))) : 1.0;
    const std::vector<Real> x_old = x, g_old = g;
    if (!line_search(alpha0)) {
      if (!restarted && !s_hist.empty()) {
        // Restart from steepest descent once before giving up.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        restarted = true;
        continue;
      }
      res.line_search_failed = true;
      break;
    }
    restarted = false;
    ++res.iterations;
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
    if (l2_norm(g) <= opt.grad_tol) {
      res.converged = true;
      break;
    }
    std::vector<Real> s(n), y(n);
    bool refreshed = false;
    if (opt.on_iteration) {
      opt.on_iteration();
      refreshed = true;
    }
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = x[j] - x_old[j];
      y[j] = g[j] - g_old[j];
    }
    const Real sy = detail::dot(s, y);
    if (sy > 1e-10 * l2_norm(s) * l2_norm(y)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }
    if (refreshed) {
      fx = f(x, g);
      ++res.n_evals;
      if (fx < best_f) {
        best_f = fx;
        best_x = x;
      }
    }
  }
  params = fx <= best_f ? x : best_x;
  res.final_loss = std::min(fx, best_f);
  return res;
}

} // namespace spinn
