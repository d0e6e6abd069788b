#pragma once

// Run-configuration schema and the command implementations behind the CLI:
// single runs (training, data-driven inits, gradient-free sweeps, product
// models), parameter sweeps, and reference-grid emission. Every run writes
// report.csv, train_log.csv (when it trains), config_resolved.json,
// checkpoints and plot files into its output directory.

#include "spinn/checkpoint.hpp"
#include "spinn/metrics.hpp"
#include "spinn/pde.hpp"
#include "spinn/plot.hpp"
#include "spinn/presets.hpp"
#include "spinn/trainer.hpp"

#include <filesystem>
#include <iostream>

namespace spinn {

class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void check_keys(const json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw config_error(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw config_error("unknown key '" + key + "' in " + where);
  }
}

inline unsigned parse_freeze(const json& arr, const std::string& where) {
  unsigned mask = 0;
  for (const auto& t : arr) {
    const std::string s = t.get<std::string>();
    if (s == "W1") mask |= TW1;
    else if (s == "B1") mask |= TB1;
    else if (s == "W2") mask |= TW2;
    else if (s == "B2") mask |= TB2;
    else throw config_error("unknown tensor '" + s + "' in " + where);
  }
  return mask;
}

inline unsigned parse_weighting(const json& arr, const std::string& where) {
  unsigned mask = 0;
  for (const auto& t : arr) {
    try {
      mask |= scheme_from_name(t.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string(e.what()) + " in " + where);
    }
  }
  return mask;
}

} // namespace detail

/// Fills defaults and validates the document; throws config_error on unknown
/// keys, unknown problems, or malformed sections.
inline json resolve_config(json cfg) {
  detail::check_keys(cfg, "config",
                     {"problem", "mode", "init", "collocation", "lambda", "stages", "data",
                      "nbn", "generalize", "pde", "eval", "seed", "out"});
  if (!cfg.contains("problem") || !cfg["problem"].contains("name"))
    throw config_error("config requires problem.name");
  detail::check_keys(cfg["problem"], "problem", {"name", "params"});
  const std::string name = cfg["problem"]["name"].get<std::string>();
  if (!ProblemRegistry::known(name)) {
    std::string msg = "unknown problem '" + name + "'; known problems:";
    for (const auto& n : ProblemRegistry::names()) msg += " " + n;
    throw config_error(msg);
  }
  if (!cfg["problem"].contains("params")) cfg["problem"]["params"] = json::object();
  for (const auto& [key, value] : cfg["problem"]["params"].items())
    if (!value.is_number()) throw config_error("problem.params." + key + " must be a number");

  const std::string mode = cfg.value("mode", "train");
  const bool is_pde = ProblemRegistry::is_pde(name);
  if (mode != "train" && mode != "pidd" && mode != "nbn" && mode != "generalize" &&
      mode != "pde-train" && mode != "pde-pidd")
    throw config_error("unknown mode '" + mode + "'");
  if (is_pde != (mode == "pde-train" || mode == "pde-pidd"))
    throw config_error("mode '" + mode + "' does not match problem kind");
  cfg["mode"] = mode;

  json& init = cfg["init"];
  if (init.is_null()) init = json::object();
  detail::check_keys(init, "init",
                     {"scheme", "n_hidden", "delta_zeta", "kappa_window", "seed", "scale_mode"});
  if (!init.contains("scheme")) init["scheme"] = mode == "pidd" ? "pidd" : "alg2";
  const std::string scheme = init["scheme"].get<std::string>();
  if (scheme != "alg1" && scheme != "alg2" && scheme != "pidd")
    throw config_error("unknown init scheme '" + scheme + "'");
  if (!init.contains("n_hidden")) init["n_hidden"] = 512;
  if (!init.contains("delta_zeta")) init["delta_zeta"] = default_delta_zeta();
  if (!init.contains("kappa_window")) init["kappa_window"] = 10;
  if (!init.contains("seed")) init["seed"] = cfg.value("seed", 0);
  if (init.contains("scale_mode")) {
    const std::string sm = init["scale_mode"].get<std::string>();
    if (sm != "crude" && sm != "kappa") throw config_error("init.scale_mode must be crude|kappa");
  }

  json& coll = cfg["collocation"];
  if (coll.is_null()) coll = json::object();
  detail::check_keys(coll, "collocation", {"n_points"});
  if (!coll.contains("n_points")) coll["n_points"] = 2048;

  json& lambda = cfg["lambda"];
  if (lambda.is_null()) lambda = json::object();
  detail::check_keys(lambda, "lambda", {"ic", "r", "ic_from_beta"});
  if (!lambda.contains("r")) lambda["r"] = 1.0;
  if (!lambda.contains("ic_from_beta")) lambda["ic_from_beta"] = false;
  if (!lambda.contains("ic")) lambda["ic"] = lambda["r"];

  if (!cfg.contains("stages")) cfg["stages"] = json::array();
  for (auto& st : cfg["stages"]) {
    detail::check_keys(st, "stage",
                       {"optimizer", "epochs", "lr", "lr_schedule", "lr_decay", "lr_decay_every",
                        "freeze", "weighting", "lambda_update_every", "psbw_update_every",
                        "rr_update_every", "rr_reset_every", "causal_eps",
                        "lbfgs_max_iterations", "lbfgs_weight_updates"});
    const std::string opt = st.value("optimizer", "adam");
    if (opt != "adam" && opt != "lbfgs") throw config_error("stage optimizer must be adam|lbfgs");
    st["optimizer"] = opt;
    if (!st.contains("epochs")) st["epochs"] = 1000;
    if (!st.contains("lr")) st["lr"] = 1e-3;
    if (st.contains("freeze")) detail::parse_freeze(st["freeze"], "stage.freeze");
    if (st.contains("weighting")) detail::parse_weighting(st["weighting"], "stage.weighting");
    const std::string sched = st.value("lr_schedule", "constant");
    if (sched != "constant" && sched != "step")
      throw config_error("stage lr_schedule must be constant|step");
  }

  json& data = cfg["data"];
  if (data.is_null()) data = json::object();
  detail::check_keys(data, "data", {"source", "substeps", "path", "nt", "nx", "fd_steps"});
  if (!data.contains("source")) data["source"] = "exact";

  json& eval = cfg["eval"];
  if (eval.is_null()) eval = json::object();
  detail::check_keys(eval, "eval", {"n_points", "substeps"});
  if (!eval.contains("n_points")) eval["n_points"] = 5000;
  if (!eval.contains("substeps")) eval["substeps"] = 64;

  if (mode == "nbn") {
    json& nbn = cfg["nbn"];
    if (nbn.is_null()) nbn = json::object();
    detail::check_keys(nbn, "nbn",
                       {"n_hidden", "windows", "epochs", "euler_presweep", "scale_mode",
                        "delta_zeta", "kappa_window", "jacobi"});
    if (!nbn.contains("n_hidden")) nbn["n_hidden"] = 10000;
    if (!nbn.contains("windows")) nbn["windows"] = 1;
    if (!nbn.contains("epochs")) nbn["epochs"] = 3;
    if (!nbn.contains("euler_presweep")) nbn["euler_presweep"] = true;
    if (!nbn.contains("delta_zeta")) nbn["delta_zeta"] = default_delta_zeta();
    if (!nbn.contains("kappa_window")) nbn["kappa_window"] = 10;
  }
  if (mode == "generalize") {
    if (!cfg.contains("generalize")) throw config_error("mode generalize requires a section");
    json& gen = cfg["generalize"];
    detail::check_keys(gen, "generalize",
                       {"param", "q_min", "q_max", "n_q", "n_x", "component", "substeps"});
    for (const char* k : {"param", "q_min", "q_max", "n_q", "n_x"})
      if (!gen.contains(k)) throw config_error(std::string("generalize.") + k + " is required");
    if (!gen.contains("component")) gen["component"] = 0;
    if (!gen.contains("substeps")) gen["substeps"] = 64;
    const std::string p = gen["param"].get<std::string>();
    if (!((name == "harmonic" && p == "omega") || (name == "lorenz" && p == "rho")))
      throw config_error("generalize.param '" + p + "' is not supported for " + name);
  }
  if (is_pde && mode == "pde-train") {
    if (!cfg.contains("pde")) throw config_error("mode pde-train requires a pde section");
    json& pd = cfg["pde"];
    detail::check_keys(pd, "pde",
                       {"n_t", "n_x", "rank", "colloc_t", "colloc_x", "delta_zeta", "reference"});
    for (const char* k : {"n_t", "n_x", "rank"})
      if (!pd.contains(k)) throw config_error(std::string("pde.") + k + " is required");
    if (!pd.contains("colloc_t")) pd["colloc_t"] = 2001;
    if (!pd.contains("colloc_x")) pd["colloc_x"] = pd["n_x"];
    if (!pd.contains("delta_zeta")) pd["delta_zeta"] = 0.7;
    if (!pd.contains("reference")) pd["reference"] = name == "advection" ? "exact" : "fd";
  }
  if (!cfg.contains("seed")) cfg["seed"] = 0;
  return cfg;
}

// ---------------------------------------------------------------------------
// Run artifacts
// ---------------------------------------------------------------------------

struct RunContext {
  std::filesystem::path out;
  json resolved;
  std::uint64_t config_hash = 0;
  std::ofstream train_log;
  bool log_header_written = false;

  explicit RunContext(const json& resolved_cfg, const std::string& out_dir)
      : out(out_dir), resolved(resolved_cfg) {
    std::filesystem::create_directories(out);
    const std::string dump = resolved.dump(2);
    config_hash = fnv1a_hash(dump);
    std::ofstream f(out / "config_resolved.json");
    f << dump << '\n';
  }

  void log_row(int stage, long epoch, const LossTerms& lt, const WeightState& st,
               double wall_ms) {
    if (!train_log.is_open()) train_log.open(out / "train_log.csv");
    if (!log_header_written) {
      train_log << "stage,epoch,total_loss";
      for (std::size_t k = 0; k < lt.l_ic.size(); ++k) train_log << ",l_ic_" << k;
      for (std::size_t k = 0; k < lt.l_r.size(); ++k) train_log << ",l_r_" << k;
      train_log << ",lambda_ic,lambda_r,causal_eps,wall_ms\n";
      log_header_written = true;
    }
    char buf[48];
    auto put = [&](Real v) {
      std::snprintf(buf, sizeof buf, "%.9e", v);
      train_log << ',' << buf;
    };
    train_log << stage << ',' << epoch;
    put(lt.total);
    for (Real v : lt.l_ic) put(v);
    for (Real v : lt.l_r) put(v);
    put(st.lambda_ic[0]);
    put(st.lambda_r[0]);
    put(st.causal_eps);
    train_log << ',' << static_cast<long>(wall_ms) << '\n';
  }

  TrainHooks hooks() {
    TrainHooks h;
    h.log = [this](int stage, long epoch, const LossTerms& lt, const WeightState& st,
                   double ms) { log_row(stage, epoch, lt, st, ms); };
    h.stage_done = [this](int stage, const std::vector<ShallowNet>& nets) {
      json j = json::array();
      for (const auto& n : nets) j.push_back(net_to_json(n));
      save_json(j, (out / ("stage" + std::to_string(stage) + ".json")).string());
    };
    return h;
  }
};

namespace detail {

inline ReferenceGrid ode_reference(const OdeSystem& sys, std::span<const Real> xs,
                                   int substeps) {
  return sys.has_exact() ? exact_grid(sys, xs) : integrate_ode(sys, xs, substeps);
}

inline void ode_plots(const RunContext& ctx, const OdeSystem& sys,
                      const std::function<Real(int, Real)>& predict, int substeps) {
  const std::vector<Real> xs = uniform_grid(sys.x_lo, sys.x_hi, 1000);
  const ReferenceGrid ref = ode_reference(sys, xs, substeps);
  for (int c = 0; c < sys.n_components; ++c) {
    LineSeries pred{"prediction", "#d62728", {}, true};
    LineSeries exact{"reference", "#1f77b4", {}, false};
    LineSeries err{"absolute error", "#2ca02c", {}, false};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Real p = predict(c, xs[i]);
      pred.y.push_back(p);
      exact.y.push_back(ref.values[c][i]);
      err.y.push_back(std::abs(p - ref.values[c][i]));
    }
    const std::string tag = "component" + std::to_string(c);
    write_line_svg((ctx.out / ("solution_" + tag + ".svg")).string(),
                   sys.name + " " + tag, xs, {exact, pred});
    write_line_svg((ctx.out / ("abs_error_" + tag + ".svg")).string(),
                   sys.name + " " + tag + " |error|", xs, {err}, true);
  }
}

inline EvalReport evaluate_ode(const OdeSystem& sys, const std::function<Real(int, Real)>& f,
                               const json& eval_cfg) {
  const int n = eval_cfg["n_points"].get<int>();
  const int substeps = eval_cfg["substeps"].get<int>();
  const std::vector<Real> xs = uniform_grid(sys.x_lo, sys.x_hi, n);
  const ReferenceGrid ref = ode_reference(sys, xs, substeps);
  EvalReport rep;
  rep.n_eval_points = n;
  std::vector<Real> pred(xs.size());
  for (int c = 0; c < sys.n_components; ++c) {
    for (std::size_t i = 0; i < xs.size(); ++i) pred[i] = f(c, xs[i]);
    rep.rel_l2.push_back(rel_l2(pred, ref.values[c]));
  }
  return rep;
}

inline InitConfig init_config_from(const json& init) {
  InitConfig cfg;
  cfg.n_hidden = init["n_hidden"].get<int>();
  cfg.delta_zeta = init["delta_zeta"].get<Real>();
  cfg.kappa_window = init["kappa_window"].get<int>();
  cfg.rng_seed = init["seed"].get<std::uint64_t>();
  if (init.contains("scale_mode"))
    cfg.scale_mode = init["scale_mode"] == "crude" ? ScaleMode::Crude : ScaleMode::Kappa;
  return cfg;
}

inline Schedule schedule_from(const json& cfg) {
  Schedule sched;
  sched.n_collocation = cfg["collocation"]["n_points"].get<int>();
  sched.lambda_r0 = cfg["lambda"]["r"].get<Real>();
  sched.lambda_ic0 = cfg["lambda"]["ic"].get<Real>();
  sched.lambda_ic_from_beta = cfg["lambda"]["ic_from_beta"].get<bool>();
  for (const auto& st : cfg["stages"]) {
    TrainStage ts;
    ts.optimizer = st["optimizer"] == "lbfgs" ? TrainStage::Opt::Lbfgs : TrainStage::Opt::Adam;
    ts.epochs = st["epochs"].get<long>();
    ts.lr = st["lr"].get<Real>();
    if (st.value("lr_schedule", "constant") == "step") {
      ts.lr_schedule = AdamState::Schedule::Step;
      ts.lr_decay = st.value("lr_decay", 0.9);
      ts.lr_decay_every = st.value("lr_decay_every", 5000L);
    }
    if (st.contains("freeze")) ts.freeze = parse_freeze(st["freeze"], "stage.freeze");
    if (st.contains("weighting")) ts.weighting = parse_weighting(st["weighting"], "stage");
    ts.lambda_update_every = st.value("lambda_update_every", 1000L);
    ts.psbw_update_every = st.value("psbw_update_every", 1L);
    ts.rr_update_every = st.value("rr_update_every", 1L);
    ts.rr_reset_every = st.value("rr_reset_every", 0L);
    ts.causal_initial_eps = st.value("causal_eps", 1e-8);
    ts.lbfgs_max_iterations = st.value("lbfgs_max_iterations", 5000);
    ts.lbfgs_weight_updates = st.value("lbfgs_weight_updates", true);
    sched.stages.push_back(ts);
  }
  return sched;
}

inline std::function<OdeSystem(Real)> make_family(const json& cfg) {
  const std::string name = cfg["problem"]["name"].get<std::string>();
  const json& gen = cfg["generalize"];
  std::map<std::string, Real> params;
  for (const auto& [key, value] : cfg["problem"]["params"].items())
    params[key] = value.get<Real>();
  if (name == "harmonic") {
    const Real T = params.count("T") ? params["T"] : 12.0;
    return [T](Real w) { return harmonic_oscillator(T, 1.0, w * w); };
  }
  const Real T = params.count("T") ? params["T"] : 20.0;
  const Real sigma = params.count("sigma") ? params["sigma"] : 10.0;
  const Real beta = params.count("beta") ? params["beta"] : 8.0 / 3.0;
  (void)gen;
  return [T, sigma, beta](Real rho) { return lorenz(T, sigma, rho, beta); };
}

} // namespace detail

// ---------------------------------------------------------------------------
// Commands. Return process exit codes: 0 ok, 2 config error, 3 numeric abort.
// ---------------------------------------------------------------------------

inline int cmd_run(json user_cfg, const std::string& out_dir, std::ostream& err = std::cerr) {
  json cfg;
  try {
    cfg = resolve_config(std::move(user_cfg));
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  RunContext ctx(cfg, out_dir);
  const std::string mode = cfg["mode"].get<std::string>();
  const std::string pname = cfg["problem"]["name"].get<std::string>();
  std::map<std::string, Real> params;
  for (const auto& [key, value] : cfg["problem"]["params"].items())
    params[key] = value.get<Real>();

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto wall_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  try {
    EvalReport rep;
    if (mode == "train" || mode == "pidd") {
      const OdeSystem sys = ProblemRegistry::make_ode(pname, params);
      const InitConfig icfg = detail::init_config_from(cfg["init"]);
      std::vector<ShallowNet> nets;
      const std::string scheme = cfg["init"]["scheme"].get<std::string>();
      if (scheme == "pidd" || mode == "pidd") {
        const std::vector<Real> grid = half_open_grid(sys.x_lo, sys.x_hi, icfg.n_hidden);
        ReferenceGrid data;
        const std::string source = cfg["data"]["source"].get<std::string>();
        if (source == "exact" && sys.has_exact()) data = exact_grid(sys, grid);
        else if (source == "file") data = load_reference(cfg["data"]["path"].get<std::string>());
        else data = integrate_ode(sys, grid, cfg["data"].value("substeps", 16));
        for (int c = 0; c < sys.n_components; ++c)
          nets.push_back(init_pidd(sys, c, data, icfg));
      } else {
        for (int c = 0; c < sys.n_components; ++c)
          nets.push_back(scheme == "alg1" ? init_alg1(sys, c, icfg)
                                          : init_alg2(sys, c, icfg));
      }
      const Schedule sched = detail::schedule_from(cfg);
      WeightState state = make_weight_state(sys, sched);
      TrainHooks hooks = ctx.hooks();
      const TrainResult tr =
          sched.stages.empty() ? TrainResult{} : train(nets, sys, sched, state, &hooks);
      json model = json::array();
      for (const auto& n : nets) model.push_back(net_to_json(n));
      save_json(model, (ctx.out / "model.json").string());
      auto predict = [&nets](int c, Real x) { return forward(nets[c], x)[0]; };
      rep = detail::evaluate_ode(sys, predict, cfg["eval"]);
      rep.lbfgs_iterations = tr.lbfgs_iterations;
      rep.epochs = tr.epochs;
      detail::ode_plots(ctx, sys, predict, cfg["eval"]["substeps"].get<int>());
      if (tr.aborted) {
        rep.wall_ms = wall_ms();
        append_report_csv((ctx.out / "report.csv").string(), pname, rep, ctx.config_hash, true);
        err << "training aborted: " << tr.abort_reason << "\n";
        return 3;
      }
    } else if (mode == "nbn") {
      const OdeSystem sys = ProblemRegistry::make_ode(pname, params);
      const json& nb = cfg["nbn"];
      NbnOptions opt;
      opt.n_hidden = nb["n_hidden"].get<int>();
      opt.epochs = nb["epochs"].get<int>();
      opt.euler_presweep = nb["euler_presweep"].get<bool>();
      opt.delta_zeta = nb["delta_zeta"].get<Real>();
      opt.kappa_window = nb["kappa_window"].get<int>();
      if (nb.contains("jacobi")) opt.jacobi = nb["jacobi"].get<bool>();
      if (nb.contains("scale_mode"))
        opt.scale_mode = nb["scale_mode"] == "crude" ? ScaleMode::Crude : ScaleMode::Kappa;
      const StitchedModel sm = nbn_train_windows(sys, nb["windows"].get<int>(), opt);
      json model;
      model["edges"] = sm.edges;
      model["windows"] = json::array();
      for (const auto& w : sm.windows) {
        json nets = json::array();
        for (const auto& n : w) nets.push_back(net_to_json(n));
        model["windows"].push_back(nets);
      }
      save_json(model, (ctx.out / "model.json").string());
      auto predict = [&sm](int c, Real x) { return sm.eval(c, x); };
      rep = detail::evaluate_ode(sys, predict, cfg["eval"]);
      detail::ode_plots(ctx, sys, predict, cfg["eval"]["substeps"].get<int>());
    } else if (mode == "generalize") {
      const json& gen = cfg["generalize"];
      const auto family = detail::make_family(cfg);
      const int n_q = gen["n_q"].get<int>();
      const int n_x = gen["n_x"].get<int>();
      const int component = gen["component"].get<int>();
      const int substeps = gen["substeps"].get<int>();
      const std::vector<Real> qg =
          uniform_grid(gen["q_min"].get<Real>(), gen["q_max"].get<Real>(), n_q);
      const OdeSystem probe = family(qg[0]);
      const std::vector<Real> xg = half_open_grid(probe.x_lo, probe.x_hi, n_x);
      std::vector<std::vector<Real>> data(probe.n_components,
                                          std::vector<Real>(static_cast<std::size_t>(n_x) * n_q));
      for (int j = 0; j < n_q; ++j) {
        const OdeSystem sys_j = family(qg[j]);
        const ReferenceGrid ref = detail::ode_reference(sys_j, xg, substeps);
        for (int c = 0; c < probe.n_components; ++c)
          std::copy(ref.values[c].begin(), ref.values[c].end(),
                    data[c].begin() + static_cast<std::size_t>(j) * n_x);
      }
      InitConfig icfg = detail::init_config_from(cfg["init"]);
      const GeneralizedNet g = init_generalized(family, component, data, xg, qg, icfg);
      json model;
      model["u_body"] = net_to_json(g.u_body);
      model["q_body"] = net_to_json(g.q_body);
      model["q_grid"] = g.q_grid;
      save_json(model, (ctx.out / "model.json").string());
      const std::vector<Real> eval_x =
          uniform_grid(probe.x_lo, probe.x_hi, cfg["eval"]["n_points"].get<int>() / 5);
      const MuResult mu = generalization_mu(g, family, component, qg, eval_x, substeps);
      rep.rel_l2 = {mu.eps_train};
      rep.mu = mu.mu;
      rep.n_eval_points = static_cast<int>(eval_x.size());
      LineSeries tr{"trained parameters", "#1f77b4", mu.per_q_train};
      write_line_svg((ctx.out / "per_q_error_trained.svg").string(),
                     pname + " per-parameter error", qg, {tr}, true);
      std::vector<Real> qh(qg.begin(), qg.end() - 1);
      for (Real& v : qh) v += 0.5 * (qg[1] - qg[0]);
      LineSeries sh{"half-shifted parameters", "#d62728", mu.per_q_shifted};
      write_line_svg((ctx.out / "per_q_error_shifted.svg").string(),
                     pname + " per-parameter error (unseen)", qh, {sh}, true);
    } else if (mode == "pde-pidd" || mode == "pde-train") {
      const PdeSystem pde = ProblemRegistry::make_pde(pname, params);
      SpinnModel model;
      PdeTrainResult tr;
      ReferenceGrid ref;
      const json& data = cfg["data"];
      if (mode == "pde-pidd") {
        const std::string source = data["source"].get<std::string>();
        if (source == "file") {
          ref = load_reference(data["path"].get<std::string>());
        } else if (source == "exact") {
          if (!pde.has_exact()) throw config_error("no exact solution for " + pname);
          ref.provenance = Provenance::exact;
          ref.axes = {uniform_grid(pde.t_lo, pde.t_hi, data.value("nt", 201)),
                      half_open_grid(pde.x_lo, pde.x_hi, data.value("nx", 128))};
          ref.values.assign(1, {});
          ref.values[0].reserve(ref.n_points());
          for (Real t : ref.axes[0])
            for (Real x : ref.axes[1]) ref.values[0].push_back(pde.exact(t, x));
        } else {
          ref = allen_cahn_fd(data.value("fd_steps", 20000), data.value("nx", 512),
                              data.value("nt", 201));
        }
        InitConfig icfg = detail::init_config_from(cfg["init"]);
        model = spinn_pidd_init(pde, ref, icfg);
      } else {
        const json& pd = cfg["pde"];
        InitConfig icfg;
        icfg.delta_zeta = pd["delta_zeta"].get<Real>();
        model = spinn_init(pde, pd["n_t"].get<int>(), pd["n_x"].get<int>(),
                           pd["rank"].get<int>(), icfg);
        SpinnProblemBinding bind;
        bind.model = &model;
        bind.pde = &pde;
        bind.t_pts = uniform_grid(pde.t_lo, pde.t_hi, pd["colloc_t"].get<int>());
        bind.x_pts = uniform_grid(pde.x_lo, pde.x_hi, pd["colloc_x"].get<int>());
        Schedule sched = detail::schedule_from(cfg);
        std::vector<Real> zero = {0.0};
        WeightState state =
            WeightState::make(1, static_cast<int>(bind.t_pts.size() * bind.x_pts.size()), zero,
                              pde.t_hi - pde.t_lo, sched.lambda_r0, false);
        state.beta = {static_cast<Real>(bind.t_pts.size()) / (pde.t_hi - pde.t_lo)};
        state.lambda_ic = {sched.lambda_ic_from_beta ? state.beta[0] * sched.lambda_r0
                                                     : sched.lambda_ic0};
        TrainHooks hooks = ctx.hooks();
        tr = train_pde(bind, sched, state, &hooks);
        const std::string refsrc = pd["reference"].get<std::string>();
        if (refsrc == "exact" && pde.has_exact()) {
          ref.provenance = Provenance::exact;
          ref.axes = {uniform_grid(pde.t_lo, pde.t_hi, 201),
                      half_open_grid(pde.x_lo, pde.x_hi, 256)};
          ref.values.assign(1, {});
          for (Real t : ref.axes[0])
            for (Real x : ref.axes[1]) ref.values[0].push_back(pde.exact(t, x));
        } else {
          ref = allen_cahn_fd(20000, 512, 201);
        }
      }
      save_json(spinn_to_json(model), (ctx.out / "model.json").string());
      const std::vector<Real> pred = spinn_predict_grid(model, ref.axes[0], ref.axes[1]);
      rep.rel_l2 = {rel_l2(pred, ref.values[0])};
      rep.n_eval_points = static_cast<int>(ref.n_points());
      rep.lbfgs_iterations = tr.lbfgs_iterations;
      rep.epochs = tr.epochs;
      write_heatmap_bmp((ctx.out / "solution.bmp").string(), pred,
                        static_cast<int>(ref.axes[0].size()),
                        static_cast<int>(ref.axes[1].size()));
      std::vector<Real> abs_err(pred.size());
      for (std::size_t i = 0; i < pred.size(); ++i)
        abs_err[i] = std::abs(pred[i] - ref.values[0][i]);
      write_heatmap_bmp((ctx.out / "abs_error.bmp").string(), abs_err,
                        static_cast<int>(ref.axes[0].size()),
                        static_cast<int>(ref.axes[1].size()));
      write_heatmap_bmp((ctx.out / "reference.bmp").string(), ref.values[0],
                        static_cast<int>(ref.axes[0].size()),
                        static_cast<int>(ref.axes[1].size()));
      if (tr.aborted) {
        rep.wall_ms = wall_ms();
        append_report_csv((ctx.out / "report.csv").string(), pname, rep, ctx.config_hash, true);
        err << "training aborted: " << tr.abort_reason << "\n";
        return 3;
      }
    }
    rep.wall_ms = wall_ms();
    append_report_csv((ctx.out / "report.csv").string(), pname, rep, ctx.config_hash, true);
    std::printf("run complete: %s ->", pname.c_str());
    for (Real e : rep.rel_l2) std::printf(" %.3e", e);
    if (rep.mu) std::printf("  (mu = %.3f)", *rep.mu);
    std::printf("  [%s]\n", (ctx.out / "report.csv").c_str());
    return 0;
  } catch (const numeric_error& e) {
    err << "numeric abort: " << e.what() << "\n";
    return 3;
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
}

/// One run per axis value; failed cells record NaN with a status column.
inline int cmd_sweep(json base_cfg, const std::string& axis, const std::vector<Real>& values,
                     const std::string& out_dir, std::ostream& err = std::cerr) {
  if (axis != "n_hidden" && axis != "n_points" && axis != "delta_zeta" && axis != "T") {
    err << "config error: unknown sweep axis '" << axis
        << "' (expected n_hidden|n_points|delta_zeta|T)\n";
    return 2;
  }
  json resolved;
  try {
    resolved = resolve_config(base_cfg);
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(std::filesystem::path(out_dir) / "sweep.csv");
  csv << "axis_value";
  const OdeSystem probe = ProblemRegistry::is_pde(resolved["problem"]["name"])
                              ? OdeSystem{}
                              : ProblemRegistry::make_ode(resolved["problem"]["name"]);
  const int n_comp = std::max(1, probe.n_components);
  for (int c = 0; c < n_comp; ++c) csv << ",rel_l2_" << c;
  csv << ",status\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    json cell = resolved;
    if (axis == "n_hidden") cell["init"]["n_hidden"] = static_cast<int>(values[i]);
    else if (axis == "n_points") cell["collocation"]["n_points"] = static_cast<int>(values[i]);
    else if (axis == "delta_zeta") cell["init"]["delta_zeta"] = values[i];
    else cell["problem"]["params"]["T"] = values[i];
    const std::string cell_dir =
        (std::filesystem::path(out_dir) / ("cell" + std::to_string(i))).string();
    const int rc = cmd_run(cell, cell_dir, err);
    csv << values[i];
    if (rc == 0 || rc == 3) {
      std::ifstream rf(std::filesystem::path(cell_dir) / "report.csv");
      std::string line;
      std::getline(rf, line); // header
      std::vector<Real> errs;
      while (std::getline(rf, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const auto c3 = line.find(',', c2 + 1);
        errs.push_back(std::stod(line.substr(c2 + 1, c3 - c2 - 1)));
      }
      for (int c = 0; c < n_comp; ++c)
        csv << ',' << (c < static_cast<int>(errs.size()) ? std::to_string(errs[c]) : "nan");
      csv << ',' << (rc == 0 ? "ok" : "aborted") << '\n';
    } else {
      for (int c = 0; c < n_comp; ++c) csv << ",nan";
      csv << ",error\n";
    }
  }
  return 0;
}

inline int cmd_reference(const std::string& problem, const json& grid_spec,
                         const std::string& out_path, std::ostream& err = std::cerr) {
  try {
    if (!ProblemRegistry::known(problem)) throw config_error("unknown problem " + problem);
    if (ProblemRegistry::is_pde(problem)) {
      if (problem != "allen-cahn") {
        const PdeSystem pde = ProblemRegistry::make_pde(problem);
        ReferenceGrid g;
        g.provenance = Provenance::exact;
        g.axes = {uniform_grid(pde.t_lo, pde.t_hi, grid_spec.value("nt", 201)),
                  half_open_grid(pde.x_lo, pde.x_hi, grid_spec.value("nx", 256))};
        g.values.assign(1, {});
        for (Real t : g.axes[0])
          for (Real x : g.axes[1]) g.values[0].push_back(pde.exact(t, x));
        save_reference(g, out_path);
      } else {
        save_reference(allen_cahn_fd(grid_spec.value("fd_steps", 20000),
                                     grid_spec.value("nx", 512), grid_spec.value("nt", 201)),
                       out_path);
      }
    } else {
      const OdeSystem sys = ProblemRegistry::make_ode(problem);
      const std::vector<Real> grid =
          uniform_grid(sys.x_lo, sys.x_hi, grid_spec.value("n", 5000));
      const ReferenceGrid g = sys.has_exact()
                                  ? exact_grid(sys, grid)
                                  : integrate_ode(sys, grid, grid_spec.value("substeps", 64));
      save_reference(g, out_path);
    }
    return 0;
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    err << "numeric abort: " << e.what() << "\n";
    return 3;
  }
}

} // namespace spinn
