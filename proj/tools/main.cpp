// Command-line front end: run presets or config files, sweep a parameter
// axis, emit reference grids, list presets.

#include "spinn/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

int load_config(const std::string& preset, const std::string& config_path, spinn::json& out,
                std::ostream& err) {
  if (!preset.empty() && !config_path.empty()) {
    err << "config error: pass either --preset or --config, not both\n";
    return 2;
  }
  if (!preset.empty()) {
    const auto& lib = spinn::preset_library();
    const auto it = lib.find(preset);
    if (it == lib.end()) {
      err << "config error: unknown preset '" << preset << "'. Available presets:\n";
      for (const auto& [name, p] : lib) err << "  " << name << " - " << p.description << "\n";
      return 2;
    }
    out = spinn::json::parse(it->second.config);
    return 0;
  }
  if (config_path.empty()) {
    err << "config error: --preset or --config is required\n";
    return 2;
  }
  std::ifstream f(config_path);
  if (!f) {
    err << "config error: cannot open " << config_path << "\n";
    return 2;
  }
  try {
    out = spinn::json::parse(f);
  } catch (const spinn::json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shallow-network physics-informed solver for ODE/PDE benchmarks"};
  app.require_subcommand(1);

  std::string preset, config_path, out_dir = "run-out", axis, ref_problem, ref_out;
  std::vector<double> values;
  long seed = -1;
  int jobs = 0;
  spinn::json grid_spec = spinn::json::object();
  int grid_n = 5000, grid_nt = 201, grid_nx = 512, substeps = 64;

  CLI::App* run = app.add_subcommand("run", "execute one run from a preset or config file");
  run->add_option("--preset", preset, "preset name (see list-presets)");
  run->add_option("--config", config_path, "path to a JSON run configuration");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the configuration seed");
  run->add_option("--jobs", jobs, "cap worker threads (same as SHALLOW_PINN_THREADS)");

  CLI::App* sweep = app.add_subcommand("sweep", "run once per axis value, collect a CSV");
  sweep->add_option("--preset", preset, "preset name");
  sweep->add_option("--config", config_path, "path to a JSON run configuration");
  sweep->add_option("--axis", axis, "n_hidden | n_points | delta_zeta | T")->required();
  sweep->add_option("--values", values, "axis values")->required()->expected(-1);
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--jobs", jobs, "cap worker threads");

  CLI::App* reference = app.add_subcommand("reference", "write a reference grid CSV");
  reference->add_option("problem", ref_problem, "registry problem name")->required();
  reference->add_option("--out", ref_out, "output CSV path")->required();
  reference->add_option("--n", grid_n, "ODE grid size");
  reference->add_option("--nt", grid_nt, "PDE time samples");
  reference->add_option("--nx", grid_nx, "PDE space samples");
  reference->add_option("--substeps", substeps, "integrator substeps per interval");

  CLI::App* list = app.add_subcommand("list-presets", "print the preset library");

  CLI11_PARSE(app, argc, argv);

  if (jobs > 0) setenv("SHALLOW_PINN_THREADS", std::to_string(jobs).c_str(), 1);

  if (list->parsed()) {
    for (const auto& [name, p] : spinn::preset_library())
      std::printf("%-26s %s\n", name.c_str(), p.description);
    return 0;
  }
  if (reference->parsed()) {
    grid_spec["n"] = grid_n;
    grid_spec["nt"] = grid_nt;
    grid_spec["nx"] = grid_nx;
    grid_spec["substeps"] = substeps;
    return spinn::cmd_reference(ref_problem, grid_spec, ref_out);
  }

  spinn::json cfg;
  if (const int rc = load_config(preset, config_path, cfg, std::cerr)) return rc;
  if (seed >= 0) cfg["seed"] = seed;

  if (run->parsed()) return spinn::cmd_run(cfg, out_dir);
  return spinn::cmd_sweep(cfg, axis, std::vector<spinn::Real>(values.begin(), values.end()),
                          out_dir);
}
