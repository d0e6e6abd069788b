#pragma once

// Multi-stage training over ODE systems (Adam / LBFGS stages with per-stage
// freeze masks, weighting sets and recalculation cadences), time-window
// decomposition with a stitched predictor, and the gradient-free
// neuron-by-neuron sweep trainer.

#include "spinn/init.hpp"
#include "spinn/metrics.hpp"
#include "spinn/optim.hpp"
#include "spinn/weighting.hpp"

#include <chrono>

namespace spinn {

struct TrainStage {
  enum class Opt { Adam, Lbfgs };
  Opt optimizer = Opt::Adam;
  long epochs = 1000; // Adam epochs, or LBFGS calls
  Real lr = 1e-3;
  AdamState::Schedule lr_schedule = AdamState::Schedule::Constant;
  Real lr_decay = 0.9;
  long lr_decay_every = 5000;
  unsigned freeze = 0;    // TensorFlag mask applied to every component net
  unsigned weighting = 0; // SchemeFlag mask active during this stage
  long lambda_update_every = 1000;
  long psbw_update_every = 1;
  long rr_update_every = 1;
  long rr_reset_every = 0; // 0: never reset
  Real causal_initial_eps = 1e-8;
  int lbfgs_max_iterations = 5000;
  // Update causal eps and the EMA buffers inside LBFGS closure evaluations
  // (matching optimizer-in-the-loop weighting); turn off for a fixed
  // objective within each call.
  bool lbfgs_weight_updates = true;
};

struct Schedule {
  std::vector<TrainStage> stages;
  int n_collocation = 2048;
  Real lambda_r0 = 1.0;
  Real lambda_ic0 = 1.0;
  bool lambda_ic_from_beta = false; // lambda_ic = beta * lambda_r at start
  long log_every = 100;
};

struct TrainHooks {
  std::function<void(int stage, long epoch, const LossTerms&, const WeightState&, double wall_ms)>
      log;
  std::function<void(int stage, const std::vector<ShallowNet>&)> stage_done;
};

struct TrainResult {
  long lbfgs_iterations = 0;
  long epochs = 0;
  double wall_ms = 0.0;
  bool aborted = false;
  std::string abort_reason;
  Real final_loss = 0.0;
};

inline WeightState make_weight_state(const OdeSystem& sys, const Schedule& sched) {
  WeightState st = WeightState::make(sys.n_components, sched.n_collocation, sys.initial,
                                     sys.span(), sched.lambda_r0, sched.lambda_ic_from_beta);
  if (!sched.lambda_ic_from_beta)
    std::fill(st.lambda_ic.begin(), st.lambda_ic.end(), sched.lambda_ic0);
  return st;
}

inline TrainResult train(std::vector<ShallowNet>& nets, const OdeSystem& sys,
                         const Schedule& sched, WeightState& state,
                         const TrainHooks* hooks = nullptr) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto ms_since = [&t0] {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  TrainResult res;
  const std::vector<Real> points = uniform_grid(sys.x_lo, sys.x_hi, sched.n_collocation);

  for (std::size_t si = 0; si < sched.stages.size(); ++si) {
    const TrainStage& stage = sched.stages[si];
    for (ShallowNet& n : nets) n.frozen = stage.freeze;
    const ParamPack pack = ParamPack::build(nets);
    if (pack.total == 0) continue;
    const bool hidden_static = (stage.freeze & TW1) && (stage.freeze & TB1);
    OdeLossEvaluator ev(sys, &nets, points, hidden_static);
    state.active = stage.weighting;
    if (stage.weighting & SCausal) state.causal_eps = stage.causal_initial_eps;

    std::vector<Real> theta = pack.gather(nets);
    std::vector<Real> grad(pack.total);
    std::vector<Real> best_theta = theta;
    Real best_loss = std::numeric_limits<Real>::infinity();
    std::vector<Real> icn, rn;

    auto maybe_gn = [&](long epoch) {
      if (!(stage.weighting & (SGn1 | SGn2))) return;
      if (stage.lambda_update_every <= 0 || epoch % stage.lambda_update_every != 0) return;
      ev.term_gradient_norms(state, pack, icn, rn);
      if (stage.weighting & SGn1) gn1_update(state, icn, rn);
      else gn2_update(state, icn, rn);
    };

    try {
      if (stage.optimizer == TrainStage::Opt::Adam) {
        AdamState adam;
        adam.lr = stage.lr;
        adam.schedule = stage.lr_schedule;
        adam.decay = stage.lr_decay;
        adam.decay_every = stage.lr_decay_every;
        for (long epoch = 1; epoch <= stage.epochs; ++epoch) {
          UpdateFlags flags;
          flags.causal_eps = true;
          flags.psbw = stage.psbw_update_every > 0 && epoch % stage.psbw_update_every == 0;
          flags.rr = stage.rr_update_every > 0 && epoch % stage.rr_update_every == 0;
          flags.rr_reset = stage.rr_reset_every > 0 && epoch % stage.rr_reset_every == 0;
          const LossTerms lt = ev.evaluate(state, flags, &grad, &pack);
          if (lt.total < best_loss) {
            best_loss = lt.total;
            best_theta = theta;
          }
          adam_step(adam, theta, grad);
          pack.scatter(nets, theta);
          ++res.epochs;
          maybe_gn(epoch);
          if (hooks && hooks->log &&
              (epoch == 1 || epoch == stage.epochs ||
               (sched.log_every > 0 && epoch % sched.log_every == 0)))
            hooks->log(static_cast<int>(si), epoch, lt, state, ms_since());
        }
      } else {
        for (long call = 1; call <= stage.epochs; ++call) {
          UpdateFlags pre;
          pre.psbw = stage.psbw_update_every > 0 && call % stage.psbw_update_every == 0;
          pre.rr = stage.rr_update_every > 0 && call % stage.rr_update_every == 0;
          pre.rr_reset = stage.rr_reset_every > 0 && call % stage.rr_reset_every == 0;
          pre.causal_eps = true;
          const LossTerms pre_lt = ev.evaluate(state, pre);
          if (pre_lt.total < best_loss) {
            best_loss = pre_lt.total;
            best_theta = theta;
          }
          maybe_gn(call);
          LbfgsOptions opt;
          opt.max_iterations = stage.lbfgs_max_iterations;
          // Weight-state ratchets happen between accepted iterates; each
          // line search sees a fixed objective.
          bool update_now = false;
          if (stage.lbfgs_weight_updates)
            opt.on_iteration = [&update_now] { update_now = true; };
          LossGradFn fn = [&](std::span<const Real> x, std::span<Real> g) {
            std::copy(x.begin(), x.end(), theta.begin());
            pack.scatter(nets, theta);
            std::vector<Real> gg(pack.total);
            UpdateFlags inner;
            if (update_now) {
              // Only the causal ratchet moves between iterates; the EMA
              // buffers hold until the call boundary so the curvature
              // history stays meaningful.
              inner.causal_eps = true;
              update_now = false;
            }
            const LossTerms lt = ev.evaluate(state, inner, &gg, &pack);
            std::copy(gg.begin(), gg.end(), g.begin());
            return lt.total;
          };
          const LbfgsResult lr = lbfgs_minimize(opt, fn, theta);
          pack.scatter(nets, theta);
          res.lbfgs_iterations += lr.iterations;
          ++res.epochs;
          if (lr.final_loss < best_loss) {
            best_loss = lr.final_loss;
            best_theta = theta;
          }
          if (hooks && hooks->log) {
            const LossTerms lt = ev.evaluate(state, {});
            hooks->log(static_cast<int>(si), call, lt, state, ms_since());
          }
        }
      }
    } catch (const numeric_error& err) {
      theta = best_theta;
      pack.scatter(nets, theta);
      res.aborted = true;
      res.abort_reason = err.what();
      res.wall_ms = ms_since();
      res.final_loss = best_loss;
      return res;
    }
    res.final_loss = best_loss;
    if (hooks && hooks->stage_done) hooks->stage_done(static_cast<int>(si), nets);
  }
  res.wall_ms = ms_since();
  return res;
}

// ---------------------------------------------------------------------------
// Window decomposition
// ---------------------------------------------------------------------------

struct WindowPlan {
  int n_windows = 1;
  Real window_size = 0.0; // 0: span / n_windows
  int n_hidden = 512;
};

struct StitchedModel {
  std::vector<Real> edges;                      // n_windows + 1 boundaries
  std::vector<std::vector<ShallowNet>> windows; // per-window component nets

  int locate(Real x) const {
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    long w = std::distance(edges.begin(), it) - 1;
    w = std::clamp<long>(w, 0, static_cast<long>(windows.size()) - 1);
    return static_cast<int>(w);
  }
  Real eval(int component, Real x) const {
    return forward(windows[locate(x)][component], x)[0];
  }
};

/// Makes the sub-problem for one window: same operator, shifted domain and
/// initial data.
inline OdeSystem window_system(const OdeSystem& sys, Real lo, Real hi,
                               std::vector<Real> initial) {
  OdeSystem w = sys;
  w.x_lo = lo;
  w.x_hi = hi;
  w.initial = std::move(initial);
  return w;
}

/// Sequential window training: each window takes its initial condition from
/// the previous window's prediction at the joint.
template <class InitFn>
StitchedModel train_windows(const OdeSystem& sys, const WindowPlan& plan,
                            const Schedule& per_window, InitFn&& init_fn,
                            TrainResult* accum = nullptr) {
  const Real size = plan.window_size > 0 ? plan.window_size : sys.span() / plan.n_windows;
  if (size * plan.n_windows < sys.span() * (1.0 - 1e-9))
    throw std::invalid_argument("train_windows: windows do not tile the domain");
  StitchedModel out;
  std::vector<Real> g = sys.initial;
  for (int w = 0; w < plan.n_windows; ++w) {
    const Real lo = sys.x_lo + w * size;
    const Real hi = (w + 1 == plan.n_windows) ? sys.x_hi : sys.x_lo + (w + 1) * size;
    const OdeSystem wsys = window_system(sys, lo, hi, g);
    std::vector<ShallowNet> nets = init_fn(wsys);
    WeightState state = make_weight_state(wsys, per_window);
    const TrainResult r = train(nets, wsys, per_window, state);
    if (accum) {
      accum->lbfgs_iterations += r.lbfgs_iterations;
      accum->epochs += r.epochs;
      accum->wall_ms += r.wall_ms;
      if (r.aborted) {
        accum->aborted = true;
        accum->abort_reason = r.abort_reason;
      }
    }
    if (r.aborted) {
      out.edges.push_back(lo);
      out.windows.push_back(std::move(nets));
      break;
    }
    // Re-close the output bias so the window meets the chained initial value
    // exactly; the stitched predictor is then continuous at every joint. The
    // first window keeps its trained bias (no joint on its left).
    if (w > 0)
      for (int c = 0; c < wsys.n_components; ++c)
        nets[c].b2[0] -= forward(nets[c], lo)[0] - wsys.initial[c];
    for (int c = 0; c < wsys.n_components; ++c) g[c] = forward(nets[c], hi)[0];
    out.edges.push_back(lo);
    out.windows.push_back(std::move(nets));
  }
  out.edges.push_back(sys.x_hi);
  return out;
}

// ---------------------------------------------------------------------------
// Neuron-by-neuron training (gradient-free)
// ---------------------------------------------------------------------------

struct NbnOptions {
  int n_hidden = 1000;
  int epochs = 3; // full sweeps over the neurons
  bool euler_presweep = true;
  std::optional<ScaleMode> scale_mode; // default Kappa
  bool jacobi = false;                 // default Gauss-Seidel
  Real delta_zeta = default_delta_zeta();
  int kappa_window = 10;
  // Extra neurons past the right edge so the sigmoid window is complete at
  // the boundary; without them the value there carries an O(dx) truncation
  // error that contaminates window chaining. -1: pick from delta_zeta.
  int ghost_cells = -1;
};

namespace detail {

// Saturation radius: offsets beyond it evaluate to exactly 1 (or a dropped
// ~1e-23 tail) in double precision.
inline int nbn_radius(Real delta_zeta) {
  return static_cast<int>(std::ceil(40.0 / (2.0 * delta_zeta))) + 2;
}

} // namespace detail

/// Gradient-free sweeps per Gauss-Seidel (or Jacobi) over the output weights
/// of every component net simultaneously. The output bias is re-closed after
/// initialization, after the optional Euler pre-sweep, and after every sweep
/// so the model matches the initial value at the window origin exactly.
inline std::vector<ShallowNet> nbn_train(const OdeSystem& sys, const NbnOptions& opt) {
  if (opt.epochs < 0) throw std::invalid_argument("nbn_train: epochs must be >= 0");
  const int K = sys.n_components;
  const Real dz = opt.delta_zeta;
  const Real dx = sys.span() / opt.n_hidden;
  const int ghosts = opt.ghost_cells >= 0 ? opt.ghost_cells : detail::nbn_radius(dz);
  const int n = opt.n_hidden + ghosts; // grid continues past the right edge
  const Real w1 = 2.0 * dz / dx;
  const ScaleMode mode = opt.scale_mode.value_or(ScaleMode::Kappa);
  InitConfig kcfg;
  kcfg.n_hidden = n;
  kcfg.delta_zeta = dz;
  kcfg.kappa_window = opt.kappa_window;

  std::vector<Real> scale(n);
  for (int k = 0; k < n; ++k)
    scale[k] = mode == ScaleMode::Crude ? 2.0 * dx / dz : dx / (2.0 * dz) / kappa(k, n, kcfg);

  std::vector<ShallowNet> nets(K, ShallowNet(n, 1));
  std::vector<Real> nval(K);
  for (int k = 0; k < n; ++k) {
    const Real xk = sys.x_lo + k * dx;
    sys.rhs_n(sys.initial, xk, nval);
    for (int l = 0; l < K; ++l) {
      nets[l].w1[k] = w1;
      nets[l].b1[k] = -2.0 * k * dz - w1 * sys.x_lo;
      nets[l].w2[k] = -scale[k] * nval[l];
    }
  }
  auto close_bias = [&] {
    for (int l = 0; l < K; ++l) {
      Real tail = 0.0;
      for (int k = 0; k < n; ++k)
        tail += nets[l].w2[k] * sigmoid(nets[l].w1[k] * sys.x_lo + nets[l].b1[k]);
      nets[l].b2[0] = sys.initial[l] - tail;
    }
  };
  close_bias();

  if (opt.euler_presweep) {
    std::vector<Real> xs(n);
    for (int k = 0; k < n; ++k) xs[k] = sys.x_lo + k * dx;
    const auto traj = euler_sweep(sys, xs);
    for (int k = 0; k < n; ++k) {
      sys.rhs_n(traj[k], xs[k], nval);
      for (int l = 0; l < K; ++l) nets[l].w2[k] = -scale[k] * nval[l];
    }
    close_bias();
  }

  // Sweep machinery: at grid point x_m the network value is
  //   b2 + sum_{k <= m-W-1} w2[k] + sum_{|m-k| <= W} w2[k] * sig[m-k],
  // where sig saturates to exactly 1 / drops to ~0 outside the window.
  const int W = detail::nbn_radius(dz);
  std::vector<Real> sig(2 * W + 1);
  for (int d = -W; d <= W; ++d) sig[d + W] = sigmoid(2.0 * dz * d);
  std::vector<Real> prefix(K, 0.0), u(K);
  std::vector<std::vector<Real>> snapshot;
  for (int sweep = 0; sweep < opt.epochs; ++sweep) {
    std::fill(prefix.begin(), prefix.end(), 0.0);
    if (opt.jacobi) {
      snapshot.assign(K, {});
      for (int l = 0; l < K; ++l) snapshot[l] = nets[l].w2;
    }
    for (int m = 0; m < n; ++m) {
      if (m - W - 1 >= 0)
        for (int l = 0; l < K; ++l)
          prefix[l] += opt.jacobi ? snapshot[l][m - W - 1] : nets[l].w2[m - W - 1];
      const int klo = std::max(0, m - W);
      const int khi = std::min(n - 1, m + W);
      for (int l = 0; l < K; ++l) {
        const std::vector<Real>& w2 = opt.jacobi ? snapshot[l] : nets[l].w2;
        Real acc = nets[l].b2[0] + prefix[l];
        for (int k = klo; k <= khi; ++k) acc += w2[k] * sig[m - k + W];
        u[l] = acc;
        if (!std::isfinite(acc))
          throw numeric_error("nbn_train: non-finite prediction at grid index " +
                              std::to_string(m));
      }
      const Real xm = sys.x_lo + m * dx;
      sys.rhs_n(u, xm, nval);
      for (int l = 0; l < K; ++l) nets[l].w2[m] = -scale[m] * nval[l];
    }
    close_bias();
  }
  return nets;
}

/// Window driver: NbN per window, chaining initial values through the joints.
inline StitchedModel nbn_train_windows(const OdeSystem& sys, int n_windows,
                                       const NbnOptions& opt) {
  StitchedModel out;
  const Real size = sys.span() / n_windows;
  std::vector<Real> g = sys.initial;
  for (int w = 0; w < n_windows; ++w) {
    const Real lo = sys.x_lo + w * size;
    const Real hi = (w + 1 == n_windows) ? sys.x_hi : sys.x_lo + (w + 1) * size;
    const OdeSystem wsys = window_system(sys, lo, hi, g);
    std::vector<ShallowNet> nets = nbn_train(wsys, opt);
    for (int c = 0; c < wsys.n_components; ++c) g[c] = forward(nets[c], hi)[0];
    out.edges.push_back(lo);
    out.windows.push_back(std::move(nets));
  }
  out.edges.push_back(sys.x_hi);
  return out;
}

} // namespace spinn
