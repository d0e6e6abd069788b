#pragma once

// Preset run configurations, one per benchmark experiment. Names are stable
// CLI identifiers; each value is a complete RunConfig document.

#include <json.hpp>

#include <map>
#include <string>

namespace spinn {

struct Preset {
  const char* description;
  const char* config;
};

inline const std::map<std::string, Preset>& preset_library() {
  static const std::map<std::string, Preset> lib = {
      {"harmonic-alg1-2stage",
       {"harmonic oscillator, grid+Glorot init, Adam then frozen LBFGS",
        R"({
  "problem": {"name": "harmonic", "params": {"T": 100.0}},
  "mode": "train",
  "init": {"scheme": "alg1", "n_hidden": 128, "seed": 0},
  "collocation": {"n_points": 2048},
  "lambda": {"ic": 1.0, "r": 10.0},
  "stages": [
    {"optimizer": "adam", "epochs": 1000, "lr": 1e-3, "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 2000, "freeze": ["W1", "B1"]}
  ]
})"}},
      {"harmonic-alg1-3stage",
       {"harmonic oscillator, grid+Glorot init, three-stage recipe",
        R"({
  "problem": {"name": "harmonic", "params": {"T": 100.0}},
  "mode": "train",
  "init": {"scheme": "alg1", "n_hidden": 128, "seed": 0},
  "collocation": {"n_points": 2048},
  "lambda": {"ic": 1.0, "r": 10.0},
  "stages": [
    {"optimizer": "adam", "epochs": 1000, "lr": 1e-3, "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 2000, "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 2000}
  ]
})"}},
      {"harmonic-alg2-3stage",
       {"harmonic oscillator, deterministic init, three-stage recipe",
        R"({
  "problem": {"name": "harmonic", "params": {"T": 100.0}},
  "mode": "train",
  "init": {"scheme": "alg2", "n_hidden": 512, "delta_zeta": 0.7},
  "collocation": {"n_points": 2048},
  "lambda": {"ic": 1e3, "r": 1e4},
  "stages": [
    {"optimizer": "adam", "epochs": 1000, "lr": 1e-3, "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1200, "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1200}
  ]
})"}},
      {"sphere-alg2-3stage",
       {"charged sphere potential, deterministic init, three-stage recipe",
        R"({
  "problem": {"name": "sphere", "params": {"a": 0.01, "R": 10.0}},
  "mode": "train",
  "init": {"scheme": "alg2", "n_hidden": 512, "delta_zeta": 1.0},
  "collocation": {"n_points": 8000},
  "lambda": {"ic": 10.0, "r": 10.0},
  "stages": [
    {"optimizer": "adam", "epochs": 1000, "lr": 1e-3, "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1000, "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1000}
  ]
})"}},
      {"sphere-5stage",
       {"charged sphere, five-stage recipe with causal weighting enabled late",
        R"({
  "problem": {"name": "sphere", "params": {"a": 0.01, "R": 10.0}},
  "mode": "train",
  "init": {"scheme": "alg2", "n_hidden": 512, "delta_zeta": 1.0},
  "collocation": {"n_points": 8000},
  "lambda": {"ic": 10.0, "r": 10.0},
  "stages": [
    {"optimizer": "adam", "epochs": 1000, "lr": 1e-3, "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1000, "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1000},
    {"optimizer": "adam", "epochs": 1000, "lr": 1e-3, "weighting": ["causal"], "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1000, "weighting": ["causal"]}
  ]
})"}},
      {"plane-4stage",
       {"charged plane potential, four-stage recipe",
        R"({
  "problem": {"name": "plane", "params": {"Omega": 10.0, "X": 100.0}},
  "mode": "train",
  "init": {"scheme": "alg2", "n_hidden": 512, "delta_zeta": 1.0},
  "collocation": {"n_points": 2048},
  "lambda": {"r": 1e5, "ic_from_beta": true},
  "stages": [
    {"optimizer": "adam", "epochs": 5000, "lr": 1e-3, "freeze": ["W1", "B1"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1200, "freeze": ["W1", "B1"]},
    {"optimizer": "adam", "epochs": 5000, "lr": 1e-6},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1200}
  ]
})"}},
      {"harmonic-4stage-causal-gn1",
       {"harmonic oscillator, four stages with causal weighting and global gradient normalization",
        R"({
  "problem": {"name": "harmonic", "params": {"T": 100.0}},
  "mode": "train",
  "init": {"scheme": "alg2", "n_hidden": 512, "delta_zeta": 0.7},
  "collocation": {"n_points": 2048},
  "lambda": {"r": 1e5, "ic_from_beta": true},
  "stages": [
    {"optimizer": "adam", "epochs": 5000, "lr": 1e-3, "freeze": ["W1", "B1"],
     "weighting": ["causal", "gn1"], "lambda_update_every": 1000},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1200, "freeze": ["W1", "B1"],
     "weighting": ["causal"]},
    {"optimizer": "adam", "epochs": 5000, "lr": 1e-6, "weighting": ["causal", "gn1"],
     "lambda_update_every": 1000},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1200, "weighting": ["causal"]}
  ]
})"}},
      {"slingshot-3stage",
       {"relativistic slingshot on [0,10], detach + slope emphasis + causal + GN1",
        R"({
  "problem": {"name": "slingshot", "params": {"T": 10.0}},
  "mode": "train",
  "init": {"scheme": "alg2", "n_hidden": 512, "delta_zeta": 0.7},
  "collocation": {"n_points": 5048},
  "lambda": {"r": 1.0, "ic_from_beta": true},
  "eval": {"substeps": 256},
  "stages": [
    {"optimizer": "adam", "epochs": 5000, "lr": 1e-3, "freeze": ["W1", "B1"],
     "weighting": ["detach", "d2", "causal", "gn1"], "lambda_update_every": 1000},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1000, "freeze": ["W1", "B1"],
     "weighting": ["detach", "d2", "causal"]},
    {"optimizer": "lbfgs", "epochs": 5, "lbfgs_max_iterations": 1000,
     "weighting": ["detach", "d2", "causal"]}
  ]
})"}},
      {"expgrowth-causal-psbw",
       {"exponential growth to T=10, causal + predicted-solution weighting (desk size)",
        R"({
  "problem": {"name": "expgrowth", "params": {"T": 10.0}},
  "mode": "train",
  "init": {"scheme": "alg2", "n_hidden": 256, "delta_zeta": 0.7},
  "collocation": {"n_points": 1024},
  "lambda": {"r": 10.0, "ic_from_beta": true},
  "stages": [
    {"optimizer": "adam", "epochs": 5000, "lr": 1e-3, "freeze": ["W1", "B1"],
     "weighting": ["detach", "causal", "psbw"]},
    {"optimizer": "adam", "epochs": 100000, "lr": 1e-2, "freeze": ["W1", "B1"],
     "weighting": ["detach", "causal", "psbw"]},
    {"optimizer": "adam", "epochs": 30000, "lr": 1e-3, "freeze": ["W1", "B1"],
     "weighting": ["detach", "causal", "psbw"]},
    {"optimizer": "adam", "epochs": 10000, "lr": 1e-4, "freeze": ["W1", "B1"],
     "weighting": ["detach", "causal", "psbw"]},
    {"optimizer": "lbfgs", "epochs": 15, "lbfgs_max_iterations": 1500, "freeze": ["W1", "B1"],
     "weighting": ["causal", "psbw"]},
    {"optimizer": "lbfgs", "epochs": 15, "lbfgs_max_iterations": 1500,
     "weighting": ["causal", "psbw"]}
  ]
})"}},
      {"slingshot-t9-20-psbw",
       {"slingshot restarted at t=9, long Adam schedule with PSBW (paper-scale, slow)",
        R"({
  "problem": {"name": "slingshot", "params": {"T": 20.0, "t0": 9.0}},
  "mode": "train",
  "init": {"scheme": "alg2", "n_hidden": 512, "delta_zeta": 0.7},
  "collocation": {"n_points": 5048},
  "lambda": {"r": 1.0, "ic_from_beta": true},
  "eval": {"substeps": 256},
  "stages": [
    {"optimizer": "adam", "epochs": 5000, "lr": 1e-3, "freeze": ["W1", "B1"],
     "weighting": ["detach", "causal", "psbw"], "psbw_update_every": 1000},
    {"optimizer": "lbfgs", "epochs": 15, "lbfgs_max_iterations": 5000, "freeze": ["W1", "B1"],
     "weighting": ["detach", "causal", "psbw"]},
    {"optimizer": "adam", "epochs": 50000, "lr": 1e-5, "lr_schedule": "step",
     "lr_decay": 0.9, "lr_decay_every": 5000,
     "weighting": ["detach", "causal", "psbw"], "psbw_update_every": 1000},
    {"optimizer": "lbfgs", "epochs": 15, "lbfgs_max_iterations": 5000,
     "weighting": ["detach", "causal", "psbw"]}
  ]
})"}},
      {"slingshot-rr",
       {"slingshot on [0,20], relative-residual weighting (paper-scale, slow)",
        R"({
  "problem": {"name": "slingshot", "params": {"T": 20.0}},
  "mode": "train",
  "init": {"scheme": "alg2", "n_hidden": 1024, "delta_zeta": 0.7},
  "collocation": {"n_points": 10000},
  "lambda": {"r": 1.0, "ic_from_beta": true},
  "eval": {"substeps": 256},
  "stages": [
    {"optimizer": "adam", "epochs": 5000, "lr": 1e-3, "freeze": ["W1", "B1"],
     "weighting": ["detach", "causal", "psbw", "rr"], "causal_eps": 1e-24},
    {"optimizer": "adam", "epochs": 100000, "lr": 1e-5, "lr_schedule": "step",
     "lr_decay": 0.9, "lr_decay_every": 5000,
     "weighting": ["detach", "causal", "psbw", "rr"], "causal_eps": 1e-24}
  ]
})"}},
      {"harmonic-pidd",
       {"harmonic oscillator, data-driven init at N=20000 (no training)",
        R"({
  "problem": {"name": "harmonic", "params": {"T": 100.0}},
  "mode": "pidd",
  "init": {"scheme": "pidd", "n_hidden": 20000},
  "data": {"source": "exact"}
})"}},
      {"lorenz-pidd",
       {"Lorenz system, data-driven init at N=10000 (no training)",
        R"({
  "problem": {"name": "lorenz", "params": {"T": 20.0}},
  "mode": "pidd",
  "init": {"scheme": "pidd", "n_hidden": 10000},
  "data": {"source": "rk4", "substeps": 40},
  "eval": {"substeps": 400}
})"}},
      {"harmonic-gen",
       {"harmonic oscillator family over the frequency, selector-generalized init",
        R"({
  "problem": {"name": "harmonic", "params": {"T": 12.0}},
  "mode": "generalize",
  "generalize": {"param": "omega", "q_min": 1.0, "q_max": 10.0, "n_q": 100,
                 "n_x": 2000, "component": 0}
})"}},
      {"lorenz-gen",
       {"Lorenz family over rho in [20,25], selector-generalized init",
        R"({
  "problem": {"name": "lorenz", "params": {"T": 20.0}},
  "mode": "generalize",
  "generalize": {"param": "rho", "q_min": 20.0, "q_max": 25.0, "n_q": 200,
                 "n_x": 2000, "component": 0, "substeps": 40}
})"}},
      {"lorenz-gen-chaotic",
       {"Lorenz family over rho in [25,30] (chaotic regime), selector-generalized init",
        R"({
  "problem": {"name": "lorenz", "params": {"T": 20.0}},
  "mode": "generalize",
  "generalize": {"param": "rho", "q_min": 25.0, "q_max": 30.0, "n_q": 200,
                 "n_x": 2000, "component": 0, "substeps": 40}
})"}},
      {"harmonic-nbn",
       {"harmonic oscillator, gradient-free sweeps, 10 windows x 10000 neurons",
        R"({
  "problem": {"name": "harmonic", "params": {"T": 100.0}},
  "mode": "nbn",
  "nbn": {"n_hidden": 10000, "windows": 10, "epochs": 3, "delta_zeta": 0.62,
          "kappa_window": 25}
})"}},
      {"harmonic-nbn-desk",
       {"harmonic oscillator, gradient-free sweeps, desk size (10 x 2000)",
        R"({
  "problem": {"name": "harmonic", "params": {"T": 100.0}},
  "mode": "nbn",
  "nbn": {"n_hidden": 2000, "windows": 10, "epochs": 3}
})"}},
      {"lorenz-nbn",
       {"Lorenz system, gradient-free sweeps, 20 windows x 40000 neurons",
        R"({
  "problem": {"name": "lorenz", "params": {"T": 20.0}},
  "mode": "nbn",
  "nbn": {"n_hidden": 40000, "windows": 20, "epochs": 3, "delta_zeta": 0.62,
          "kappa_window": 25},
  "eval": {"substeps": 400}
})"}},
      {"lorenz-nbn-paper-size",
       {"Lorenz system, gradient-free sweeps at the 20 x 10000 size (informational)",
        R"({
  "problem": {"name": "lorenz", "params": {"T": 20.0}},
  "mode": "nbn",
  "nbn": {"n_hidden": 10000, "windows": 20, "epochs": 3},
  "eval": {"substeps": 400}
})"}},
      {"allen-cahn-spinn",
       {"Allen-Cahn, separable product training at desk scale (rank 64, 20k epochs)",
        R"({
  "problem": {"name": "allen-cahn"},
  "mode": "pde-train",
  "pde": {"n_t": 257, "n_x": 129, "rank": 64, "colloc_t": 2001, "colloc_x": 129,
          "delta_zeta": 0.7, "reference": "fd"},
  "lambda": {"r": 1.0, "ic_from_beta": true},
  "stages": [
    {"optimizer": "adam", "epochs": 5000, "lr": 1e-3, "freeze": ["B1"],
     "weighting": ["detach", "causal", "rr"], "rr_reset_every": 1, "causal_eps": 1e-24},
    {"optimizer": "adam", "epochs": 15000, "lr": 1e-4,
     "weighting": ["detach", "causal", "rr"], "rr_reset_every": 1, "causal_eps": 1e-24},
    {"optimizer": "lbfgs", "epochs": 2, "lbfgs_max_iterations": 150,
     "weighting": ["causal", "rr"], "rr_update_every": 0, "causal_eps": 1e-24,
     "lbfgs_weight_updates": false}
  ]
})"}},
      {"allen-cahn-spinn-full",
       {"Allen-Cahn, separable product training at the published scale (very slow)",
        R"({
  "problem": {"name": "allen-cahn"},
  "mode": "pde-train",
  "pde": {"n_t": 1025, "n_x": 513, "rank": 256, "colloc_t": 8041, "colloc_x": 513,
          "delta_zeta": 0.7, "reference": "fd"},
  "lambda": {"r": 1.0, "ic_from_beta": true},
  "stages": [
    {"optimizer": "adam", "epochs": 5000, "lr": 1e-3, "freeze": ["B1"],
     "weighting": ["detach", "causal", "d2", "rr"], "rr_reset_every": 1, "causal_eps": 1e-24},
    {"optimizer": "lbfgs", "epochs": 15, "lbfgs_max_iterations": 25000,
     "weighting": ["detach", "causal", "d2", "rr"], "rr_reset_every": 1, "causal_eps": 1e-24},
    {"optimizer": "adam", "epochs": 300000, "lr": 1e-5,
     "weighting": ["detach", "causal", "d2", "rr"], "rr_reset_every": 1, "causal_eps": 1e-24},
    {"optimizer": "lbfgs", "epochs": 15, "lbfgs_max_iterations": 25000,
     "weighting": ["detach", "causal", "d2", "rr"], "rr_reset_every": 1, "causal_eps": 1e-24},
    {"optimizer": "adam", "epochs": 100000, "lr": 1e-7,
     "weighting": ["detach", "causal", "d2", "rr"], "rr_reset_every": 1, "causal_eps": 1e-24},
    {"optimizer": "lbfgs", "epochs": 15, "lbfgs_max_iterations": 25000,
     "weighting": ["detach", "causal", "d2", "rr"], "rr_reset_every": 1, "causal_eps": 1e-24}
  ]
})"}},
      {"allen-cahn-pidd",
       {"Allen-Cahn, data-driven product init from the FD reference (201 x 512)",
        R"({
  "problem": {"name": "allen-cahn"},
  "mode": "pde-pidd",
  "data": {"source": "fd", "nt": 201, "nx": 512, "fd_steps": 20000}
})"}},
      {"advection-pidd",
       {"advection at c=80, data-driven product init from the exact field (20000 x 128)",
        R"({
  "problem": {"name": "advection", "params": {"c": 80.0}},
  "mode": "pde-pidd",
  "data": {"source": "exact", "nt": 20000, "nx": 128}
})"}},
  };
  return lib;
}

} // namespace spinn
