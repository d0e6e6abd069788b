// Integration tests for the command-line front end: exit codes, artifact
// emission, reproducibility of resolved configurations.

#include "spinn/reference.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* env = std::getenv("SPINN_CLI");
  return env ? env : "tools/spinn";
}

int run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("unknown preset exits 2 and lists presets") {
  const std::string out = (fs::temp_directory_path() / "spinn_cli_bad").string();
  CHECK(run_cli("run --preset does-not-exist --out " + out) == 2);
  const std::string cmd = cli_path() + " run --preset does-not-exist --out " + out +
                          " 2>&1 | grep -c harmonic-pidd > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
}

TEST_CASE("invalid config exits 2") {
  const fs::path cfg = fs::temp_directory_path() / "spinn_bad_cfg.json";
  {
    std::ofstream f(cfg);
    f << R"({"problem": {"name": "harmonic"}, "mode": "train", "no_such_key": 1})";
  }
  CHECK(run_cli("run --config " + cfg.string() + " --out /tmp/spinn_cli_x") == 2);
  {
    std::ofstream f(cfg);
    f << R"({"problem": {"name": "nonexistent"}})";
  }
  CHECK(run_cli("run --config " + cfg.string() + " --out /tmp/spinn_cli_x") == 2);
  fs::remove(cfg);
}

TEST_CASE("numeric abort exits 3 and leaves partial artifacts") {
  const fs::path cfg = fs::temp_directory_path() / "spinn_abort_cfg.json";
  {
    std::ofstream f(cfg);
    // An absurd learning rate plus an extreme ic weight overflow the
    // weighted total within a few steps.
    f << R"({
      "problem": {"name": "expgrowth", "params": {"T": 10.0}},
      "mode": "train",
      "init": {"scheme": "alg2", "n_hidden": 32},
      "collocation": {"n_points": 64},
      "lambda": {"ic": 1e300, "r": 1.0},
      "stages": [{"optimizer": "adam", "epochs": 500, "lr": 1e12}]
    })";
  }
  const std::string out = (fs::temp_directory_path() / "spinn_cli_abort").string();
  CHECK(run_cli("run --config " + cfg.string() + " --out " + out) == 3);
  CHECK(fs::exists(fs::path(out) / "report.csv"));
  CHECK(fs::exists(fs::path(out) / "config_resolved.json"));
  fs::remove(cfg);
  fs::remove_all(out);
}

TEST_CASE("small run writes every artifact and is reproducible") {
  const fs::path cfg = fs::temp_directory_path() / "spinn_small_cfg.json";
  {
    std::ofstream f(cfg);
    f << R"({
      "problem": {"name": "plane", "params": {"Omega": 10.0, "X": 10.0}},
      "mode": "train",
      "init": {"scheme": "alg2", "n_hidden": 48, "delta_zeta": 1.0},
      "collocation": {"n_points": 128},
      "lambda": {"ic": 100.0, "r": 10.0},
      "stages": [
        {"optimizer": "adam", "epochs": 200, "lr": 1e-3, "freeze": ["W1", "B1"]},
        {"optimizer": "lbfgs", "epochs": 1, "lbfgs_max_iterations": 150, "freeze": ["W1", "B1"]}
      ]
    })";
  }
  const fs::path out1 = fs::temp_directory_path() / "spinn_cli_run1";
  const fs::path out2 = fs::temp_directory_path() / "spinn_cli_run2";
  CHECK(run_cli("run --config " + cfg.string() + " --out " + out1.string()) == 0);
  CHECK(run_cli("run --config " + cfg.string() + " --out " + out2.string()) == 0);
  for (const char* f : {"report.csv", "train_log.csv", "config_resolved.json", "model.json",
                        "stage0.json", "stage1.json", "solution_component0.svg",
                        "abs_error_component0.svg"})
    CHECK(fs::exists(out1 / f));
  // Bit-identical artifacts across runs.
  CHECK(slurp(out1 / "model.json") == slurp(out2 / "model.json"));
  CHECK(slurp(out1 / "config_resolved.json") == slurp(out2 / "config_resolved.json"));
  // The report carries a small error for this trivial problem.
  const std::string report = slurp(out1 / "report.csv");
  CHECK(report.find("plane,0,") != std::string::npos);
  // train_log has the documented column header.
  const std::string log = slurp(out1 / "train_log.csv");
  CHECK(log.rfind("stage,epoch,total_loss,l_ic_0,l_r_0,lambda_ic,lambda_r,causal_eps,wall_ms",
                  0) == 0);
  fs::remove(cfg);
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("reference command round-trips through the loader") {
  const fs::path out = fs::temp_directory_path() / "spinn_ref.csv";
  CHECK(run_cli("reference expgrowth --out " + out.string() + " --n 64") == 0);
  const spinn::ReferenceGrid g = spinn::load_reference(out.string());
  CHECK(g.axes[0].size() == 64);
  CHECK(std::abs(g.values[0].back() - std::exp(10.0)) < 1e-6 * std::exp(10.0));
  fs::remove(out);
}

TEST_CASE("lorenz reference at scale completes quickly") {
  const fs::path out = fs::temp_directory_path() / "spinn_lorenz_ref.csv";
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(run_cli("reference lorenz --out " + out.string() + " --n 10000 --substeps 16") == 0);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(s < 5.0);
  const spinn::ReferenceGrid g = spinn::load_reference(out.string());
  CHECK(g.axes[0].size() == 10000);
  CHECK(g.values.size() == 3);
  fs::remove(out);
}

TEST_CASE("sweep emits one row per value") {
  const fs::path cfg = fs::temp_directory_path() / "spinn_sweep_cfg.json";
  {
    std::ofstream f(cfg);
    f << R"({
      "problem": {"name": "expgrowth", "params": {"T": 2.0}},
      "mode": "pidd",
      "init": {"scheme": "pidd", "n_hidden": 64},
      "data": {"source": "exact"},
      "eval": {"n_points": 500}
    })";
  }
  const fs::path out = fs::temp_directory_path() / "spinn_cli_sweep";
  CHECK(run_cli("sweep --config " + cfg.string() + " --axis n_hidden --values 64 128 256 --out " +
                out.string()) == 0);
  std::ifstream f(out / "sweep.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line == "axis_value,rel_l2_0,status");
  int rows = 0;
  std::vector<double> errs;
  while (std::getline(f, line)) {
    ++rows;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    errs.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    CHECK(line.substr(c2 + 1) == "ok");
  }
  CHECK(rows == 3);
  // Data-driven interpolation sharpens with more neurons.
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  fs::remove(cfg);
  fs::remove_all(out);
}

TEST_CASE("bad sweep axis exits 2") {
  const fs::path cfg = fs::temp_directory_path() / "spinn_sweep_cfg2.json";
  {
    std::ofstream f(cfg);
    f << R"({"problem": {"name": "expgrowth"}, "mode": "pidd",
             "init": {"n_hidden": 64}})";
  }
  CHECK(run_cli("sweep --config " + cfg.string() + " --axis bogus --values 1 2 --out /tmp/x") ==
        2);
  fs::remove(cfg);
}
