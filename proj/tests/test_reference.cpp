#include "spinn/reference.hpp"

#include "test_support.hpp"

#include <cstdio>
#include <map>
#include <doctest.h>

using namespace spinn;
using testutil::close_rel;

TEST_CASE("rk4 reaches e on exponential growth") {
  const OdeSystem s = exponential_growth(1.0);
  const std::vector<Real> grid = uniform_grid(0.0, 1.0, 101);
  const ReferenceGrid ref = integrate_ode(s, grid, 4);
  CHECK(std::abs(ref.values[0].back() - std::exp(1.0)) < 1e-8);
}

TEST_CASE("rk4 matches the harmonic closed form over a long domain") {
  const OdeSystem s = harmonic_oscillator(100.0);
  const std::vector<Real> grid = uniform_grid(0.0, 100.0, 2001);
  // 4000 substeps per unit time = 200 per 0.05 interval.
  const ReferenceGrid ref = integrate_ode(s, grid, 200);
  std::vector<Real> exact0(grid.size()), exact1(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    exact0[i] = std::cos(grid[i]);
    exact1[i] = -std::sin(grid[i]);
  }
  Real num = 0, den = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    num += (ref.values[0][i] - exact0[i]) * (ref.values[0][i] - exact0[i]) +
           (ref.values[1][i] - exact1[i]) * (ref.values[1][i] - exact1[i]);
    den += exact0[i] * exact0[i] + exact1[i] * exact1[i];
  }
  CHECK(std::sqrt(num / den) < 1e-7);
}

TEST_CASE("rk4 shows fourth-order convergence") {
  const OdeSystem s = harmonic_oscillator(10.0);
  const std::vector<Real> grid = uniform_grid(0.0, 10.0, 11);
  auto max_err = [&](int substeps) {
    const ReferenceGrid ref = integrate_ode(s, grid, substeps);
    Real m = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      m = std::max(m, std::abs(ref.values[0][i] - std::cos(grid[i])));
    return m;
  };
  const Real e1 = max_err(4), e2 = max_err(8);
  const Real factor = e1 / e2;
  CHECK(factor > 10.0);
  CHECK(factor < 24.0);
}

TEST_CASE("rk4 input validation and divergence") {
  const OdeSystem s = exponential_growth(1.0);
  CHECK_THROWS_AS((void)integrate_ode(s, std::vector<Real>{0.5, 0.4}, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)integrate_ode(s, std::vector<Real>{0.5}, 0), std::invalid_argument);
  OdeSystem bad = s;
  bad.rhs_n = [](std::span<const Real> u, Real, std::span<Real> out) {
    out[0] = -u[0] * u[0] * 1e30;
  };
  CHECK_THROWS_AS((void)integrate_ode(bad, std::vector<Real>{0.5, 1.0}, 8), numeric_error);
}

TEST_CASE("euler sweep telescopes on the charged plane") {
  const OdeSystem s = charged_plane(10.0, 100.0);
  const int n = 11;
  const std::vector<Real> grid = uniform_grid(0.0, 100.0, n);
  const auto traj = euler_sweep(s, grid);
  const Real dx = 10.0;
  for (int k = 0; k < n; ++k) CHECK(traj[k][0] == 10.0 * k * dx);
}

TEST_CASE("euler sweep single step of the harmonic oscillator") {
  const OdeSystem s = harmonic_oscillator(1.0);
  const std::vector<Real> grid = uniform_grid(0.0, 1.0, 11);
  const auto traj = euler_sweep(s, grid);
  CHECK(traj[1][0] == 1.0);
  CHECK(traj[1][1] == -0.1); // u - N*dx with N = (0, 1)
  // Literal plus-sign variant integrates the other way.
  const auto plus = euler_sweep(s, grid, EulerSign::PlusN);
  CHECK(plus[1][1] == 0.1);
}

TEST_CASE("euler sweep zero rhs and uniformity check") {
  OdeSystem s = charged_plane(0.0, 1.0);
  const std::vector<Real> grid = uniform_grid(0.0, 1.0, 5);
  for (const auto& u : euler_sweep(s, grid)) CHECK(u[0] == 0.0);
  CHECK_THROWS_AS((void)euler_sweep(s, std::vector<Real>{0.0, 0.1, 0.3}),
                  std::invalid_argument);
}

TEST_CASE("euler sweep is first order on exponential growth") {
  const OdeSystem s = exponential_growth(1.0);
  auto max_err = [&](int n) {
    const std::vector<Real> grid = uniform_grid(0.0, 1.0, n + 1);
    const auto traj = euler_sweep(s, grid);
    Real m = 0;
    for (int i = 0; i <= n; ++i) m = std::max(m, std::abs(traj[i][0] - std::exp(grid[i])));
    return m;
  };
  const Real ratio = max_err(200) / max_err(400);
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.4);
}

TEST_CASE("allen-cahn fd: initial slice, bounds, self convergence" * doctest::timeout(300)) {
  const ReferenceGrid g = allen_cahn_fd(10000, 256, 51);
  const PdeSystem pde = allen_cahn();
  for (std::size_t i = 0; i < g.axes[1].size(); ++i)
    CHECK(g.values[0][i] == pde.initial(g.axes[1][i]));
  for (Real v : g.values[0]) {
    CHECK(v <= 1.01);
    CHECK(v >= -1.01);
  }
  const ReferenceGrid g2 = allen_cahn_fd(20000, 256, 51);
  const std::size_t nx = g.axes[1].size();
  std::vector<Real> a(g.values[0].end() - nx, g.values[0].end());
  std::vector<Real> b(g2.values[0].end() - nx, g2.values[0].end());
  Real num = 0, den = 0;
  for (std::size_t i = 0; i < nx; ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  CHECK(std::sqrt(num / den) < 1e-4);
  CHECK_THROWS_AS((void)allen_cahn_fd(10000, 64), std::invalid_argument);
}

TEST_CASE("reference csv round trip") {
  ReferenceGrid g;
  g.axes = {{0.0, 0.5, 1.0}, {-1.0, 1.0}};
  g.values = {{1.0, 2.0, 3.0, 4.0, 5.0, 6.0},
              {0.1, 0.2, 0.3, 0.4, 0.5, 1.0 / 3.0}};
  g.provenance = Provenance::fd;
  const std::string path = "ref_roundtrip_test.csv";
  save_reference(g, path);
  const ReferenceGrid back = load_reference(path);
  CHECK(back.axes == g.axes);
  CHECK(back.values == g.values);
  std::remove(path.c_str());
}

TEST_CASE("reference csv: tiny known file and error paths") {
  const std::string path = "ref_parse_test.csv";
  {
    std::ofstream f(path);
    f << "# axes: 2\n0 1\n# components: 1\n0.25\n0.75\n";
  }
  const ReferenceGrid g = load_reference(path);
  CHECK(g.values[0][0] == 0.25);
  CHECK(g.values[0][1] == 0.75);
  {
    std::ofstream f(path);
    f << "# axes: 2 2\n0 1\n0 1\n# components: 1\n1 2\n3\n";
  }
  CHECK_THROWS_WITH_AS((void)load_reference(path),
                       doctest::Contains("row length mismatch at line 6"), std::runtime_error);
  {
    std::ofstream f(path);
    f << "# axes: 2\n1 0\n# components: 1\n1\n2\n";
  }
  CHECK_THROWS_WITH_AS((void)load_reference(path), doctest::Contains("non-monotone"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("rk4 two-resolution agreement on registry problems") {
  const std::map<std::string, int> substeps = {
      {"harmonic", 32}, {"sphere", 4000}, {"plane", 8}, {"expgrowth", 8}, {"lorenz", 200}};
  for (const auto& [name, sub] : substeps) {
    const OdeSystem s = ProblemRegistry::make_ode(name);
    const std::vector<Real> grid = uniform_grid(s.x_lo, s.x_hi, 201);
    const ReferenceGrid a = integrate_ode(s, grid, sub);
    const ReferenceGrid b = integrate_ode(s, grid, 2 * sub);
    for (int c = 0; c < s.n_components; ++c) {
      Real num = 0, den = 0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        num += (a.values[c][i] - b.values[c][i]) * (a.values[c][i] - b.values[c][i]);
        den += b.values[c][i] * b.values[c][i];
      }
      CHECK(std::sqrt(num / std::max(den, 1e-300)) < 1e-6);
    }
  }
  // Slingshot: looser near the pulse breaks.
  const OdeSystem sl = ProblemRegistry::make_ode("slingshot", {{"T", 20.0}});
  const std::vector<Real> grid = uniform_grid(0.0, 20.0, 401);
  const ReferenceGrid a = integrate_ode(sl, grid, 64);
  const ReferenceGrid b = integrate_ode(sl, grid, 128);
  for (int c = 0; c < 4; ++c) {
    Real num = 0, den = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      num += (a.values[c][i] - b.values[c][i]) * (a.values[c][i] - b.values[c][i]);
      den += b.values[c][i] * b.values[c][i];
    }
    CHECK(std::sqrt(num / std::max(den, 1e-300)) < 1e-4);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::isfinite(b.values[c][i]));
  }
}
