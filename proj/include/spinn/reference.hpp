#pragma once

// High-accuracy reference solutions: fixed-step RK4 marching, the forward
// Euler sweep used by the gradient-free trainer, a semi-implicit finite
// difference fallback for the Allen-Cahn equation, and CSV grid ingestion.

#include "spinn/problems.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spinn {

enum class Provenance { exact, rk4, fd, file };

inline const char* provenance_name(Provenance p) {
  switch (p) {
  case Provenance::exact: return "exact";
  case Provenance::rk4: return "rk4";
  case Provenance::fd: return "fd";
  default: return "file";
  }
}

struct ReferenceGrid {
  std::vector<std::vector<Real>> axes;   // strictly increasing coordinates
  std::vector<std::vector<Real>> values; // [component][row-major over axes]
  Provenance provenance = Provenance::exact;

  std::size_t n_points() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
  }
  int n_components() const { return static_cast<int>(values.size()); }

  void validate() const {
    if (axes.empty() || values.empty())
      throw std::invalid_argument("ReferenceGrid: empty axes or values");
    for (const auto& a : axes)
      for (std::size_t i = 1; i < a.size(); ++i)
        if (!(a[i] > a[i - 1]))
          throw std::invalid_argument("ReferenceGrid: axis not strictly increasing");
    for (const auto& v : values)
      if (v.size() != n_points())
        throw std::invalid_argument("ReferenceGrid: value shape != axes outer product");
  }
};

inline std::vector<Real> uniform_grid(Real lo, Real hi, int n) {
  std::vector<Real> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = (n == 1) ? lo : lo + (hi - lo) * static_cast<Real>(i) / (n - 1);
  return g;
}

/// n points {lo + k*(hi-lo)/n}, right endpoint excluded. This is the grid
/// convention of the data-driven initializers (step = span / n_hidden).
inline std::vector<Real> half_open_grid(Real lo, Real hi, int n) {
  std::vector<Real> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<Real>(i) / n;
  return g;
}

/// RK4 march of du/dx = -N[u, x] through sorted query points, with
/// `substeps` uniform internal steps between consecutive queries (and from
/// the domain origin to the first query).
inline ReferenceGrid integrate_ode(const OdeSystem& sys, std::span<const Real> grid,
                                   int substeps) {
  if (substeps < 1) throw std::invalid_argument("integrate_ode: substeps must be >= 1");
  if (grid.empty()) throw std::invalid_argument("integrate_ode: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument("integrate_ode: grid must be strictly increasing");
    if (grid[i] < sys.x_lo - 1e-12 || grid[i] > sys.x_hi + 1e-12)
      throw std::invalid_argument("integrate_ode: query point outside domain");
  }
  const int k = sys.n_components;
  ReferenceGrid out;
  out.provenance = Provenance::rk4;
  out.axes = {std::vector<Real>(grid.begin(), grid.end())};
  out.values.assign(k, std::vector<Real>(grid.size()));

  std::vector<Real> u = sys.initial;
  auto f = [&sys, k](const std::vector<Real>& uu, Real x, std::vector<Real>& dudx) {
    sys.rhs_n(uu, x, dudx);
    for (int i = 0; i < k; ++i) dudx[i] = -dudx[i];
  };
  Real x = sys.x_lo;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    if (grid[q] > x) detail::rk4_march(f, u, x, grid[q], substeps);
    x = grid[q];
    for (int c = 0; c < k; ++c) {
      if (!std::isfinite(u[c]))
        throw numeric_error("integrate_ode: divergence at x = " + std::to_string(x) +
                            " (component " + std::to_string(c) + ")");
      out.values[c][q] = u[c];
    }
  }
  return out;
}

/// Exact-solution passthrough on a query grid.
inline ReferenceGrid exact_grid(const OdeSystem& sys, std::span<const Real> grid) {
  if (!sys.has_exact()) throw std::invalid_argument("exact_grid: no exact solution");
  ReferenceGrid out;
  out.provenance = Provenance::exact;
  out.axes = {std::vector<Real>(grid.begin(), grid.end())};
  out.values.assign(sys.n_components, std::vector<Real>(grid.size()));
  std::vector<Real> u(sys.n_components);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    sys.exact(grid[q], u);
    for (int c = 0; c < sys.n_components; ++c) out.values[c][q] = u[c];
  }
  return out;
}

enum class EulerSign { MinusN, PlusN };

/// Forward-Euler trajectory on a uniform grid. The default sign integrates
/// du/dx = -N; PlusN applies the update u + N*dx literally.
inline std::vector<std::vector<Real>> euler_sweep(const OdeSystem& sys,
                                                  std::span<const Real> x_grid,
                                                  EulerSign sign = EulerSign::MinusN) {
  const std::size_t n = x_grid.size();
  if (n < 1) throw std::invalid_argument("euler_sweep: empty grid");
  if (n >= 2) {
    const Real dx0 = x_grid[1] - x_grid[0];
    for (std::size_t i = 1; i + 1 < n; ++i)
      if (std::abs((x_grid[i + 1] - x_grid[i]) - dx0) > 1e-9 * std::max<Real>(1.0, std::abs(dx0)))
        throw std::invalid_argument("euler_sweep: grid must be uniform");
  }
  const int k = sys.n_components;
  std::vector<std::vector<Real>> traj(n);
  std::vector<Real> u = sys.initial;
  std::vector<Real> nval(k);
  traj[0] = u;
  const Real s = (sign == EulerSign::MinusN) ? -1.0 : 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const Real dx = x_grid[i] - x_grid[i - 1];
    sys.rhs_n(u, x_grid[i - 1], nval);
    for (int c = 0; c < k; ++c) u[c] += s * nval[c] * dx;
    traj[i] = u;
  }
  return traj;
}

/// Semi-implicit (implicit diffusion, explicit cubic) finite-difference
/// solution of the Allen-Cahn problem on the periodic grid
/// x_i = -1 + 2i/nx, i = 0..nx-1. Returns out_nt uniformly spaced time
/// slices including t = 0 and t = 1.
inline ReferenceGrid allen_cahn_fd(int nt, int nx, int out_nt = 201) {
  if (nx < 256) throw std::invalid_argument("allen_cahn_fd: nx must be >= 256");
  if (nt < 10000) throw std::invalid_argument("allen_cahn_fd: nt must be >= 10000");
  if (out_nt < 2 || out_nt > nt + 1)
    throw std::invalid_argument("allen_cahn_fd: bad out_nt");
  const PdeSystem pde = allen_cahn();
  const Real h = (pde.x_hi - pde.x_lo) / nx;
  const Real dt = (pde.t_hi - pde.t_lo) / nt;
  const Real alpha = 0.0001 * dt / (h * h);

  std::vector<Real> u(nx);
  for (int i = 0; i < nx; ++i) u[i] = pde.initial(pde.x_lo + i * h);

  ReferenceGrid out;
  out.provenance = Provenance::fd;
  out.axes.resize(2);
  out.axes[0] = uniform_grid(pde.t_lo, pde.t_hi, out_nt);
  out.axes[1].resize(nx);
  for (int i = 0; i < nx; ++i) out.axes[1][i] = pde.x_lo + i * h;
  out.values.assign(1, std::vector<Real>(static_cast<std::size_t>(out_nt) * nx));

  // Cyclic tridiagonal system (I - alpha*D2) u_new = rhs via Sherman-Morrison.
  const Real diag = 1.0 + 2.0 * alpha, off = -alpha;
  std::vector<Real> rhs(nx), y1(nx), y2(nx), cp(nx);
  auto thomas = [&](std::vector<Real>& d, Real first_diag, Real last_diag,
                    std::vector<Real>& y) {
    cp[0] = off / first_diag;
    y[0] = d[0] / first_diag;
    for (int i = 1; i < nx - 1; ++i) {
      const Real m = diag - off * cp[i - 1];
      cp[i] = off / m;
      y[i] = (d[i] - off * y[i - 1]) / m;
    }
    const Real m = last_diag - off * cp[nx - 2];
    y[nx - 1] = (d[nx - 1] - off * y[nx - 2]) / m;
    for (int i = nx - 2; i >= 0; --i) y[i] -= cp[i] * y[i + 1];
  };

  int next_out = 0;
  auto record = [&](int slice) {
    for (int i = 0; i < nx; ++i)
      out.values[0][static_cast<std::size_t>(slice) * nx + i] = u[i];
  };
  record(next_out++);
  std::vector<Real> q(nx, 0.0);
  for (int step = 1; step <= nt; ++step) {
    for (int i = 0; i < nx; ++i) {
      const Real g = 5.0 * u[i] * u[i] * u[i] - 5.0 * u[i];
      rhs[i] = u[i] - dt * g;
    }
    // Sherman-Morrison for the periodic corners.
    const Real gamma = -diag;
    std::vector<Real> d1 = rhs;
    thomas(d1, diag - gamma, diag - off * off / gamma, y1);
    q.assign(nx, 0.0);
    q[0] = gamma;
    q[nx - 1] = off;
    thomas(q, diag - gamma, diag - off * off / gamma, y2);
    const Real fact = (y1[0] + (off / gamma) * y1[nx - 1]) /
                      (1.0 + y2[0] + (off / gamma) * y2[nx - 1]);
    for (int i = 0; i < nx; ++i) u[i] = y1[i] - fact * y2[i];
    for (int i = 0; i < nx; ++i)
      if (!std::isfinite(u[i]) || std::abs(u[i]) > 10.0)
        throw numeric_error("allen_cahn_fd: instability at step " + std::to_string(step));
    // Emit slices at the out_nt uniformly spaced times.
    while (next_out < out_nt &&
           static_cast<long long>(step) * (out_nt - 1) >= static_cast<long long>(next_out) * nt)
      record(next_out++);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reference CSV format:
//   # axes: <n1> [<n2>]
//   <axis 1 coordinates, space separated>
//   [<axis 2 coordinates>]
//   # components: <K>
//   # provenance: <exact|rk4|fd|file>
//   then K blocks of n1 rows; each row holds n2 values (1 for 1-D grids).
// ---------------------------------------------------------------------------

inline void save_reference(const ReferenceGrid& grid, const std::string& path) {
  grid.validate();
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_reference: cannot open " + path);
  f << "# axes:";
  for (const auto& a : grid.axes) f << ' ' << a.size();
  f << '\n';
  char buf[40];
  auto put = [&](Real v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    f << buf << sep;
  };
  for (const auto& a : grid.axes) {
    for (std::size_t i = 0; i < a.size(); ++i) put(a[i], i + 1 == a.size() ? '\n' : ' ');
  }
  f << "# components: " << grid.values.size() << '\n';
  f << "# provenance: " << provenance_name(grid.provenance) << '\n';
  const std::size_t n1 = grid.axes[0].size();
  const std::size_t n2 = grid.axes.size() > 1 ? grid.axes[1].size() : 1;
  for (const auto& comp : grid.values)
    for (std::size_t r = 0; r < n1; ++r)
      for (std::size_t c = 0; c < n2; ++c)
        put(comp[r * n2 + c], c + 1 == n2 ? '\n' : ' ');
}

namespace detail {

inline std::vector<Real> parse_reals(const std::string& line, int line_no) {
  std::vector<Real> out;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == ',' || *p == '\r')) ++p;
    if (p >= end) break;
    Real v;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc())
      throw std::runtime_error("reference CSV: parse error at line " + std::to_string(line_no));
    out.push_back(v);
    p = next;
  }
  return out;
}

} // namespace detail

inline ReferenceGrid load_reference(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_reference: cannot open " + path);
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(f, line)) {
      ++line_no;
      if (!line.empty() && line != "\r") return true;
    }
    return false;
  };
  if (!next_line() || line.rfind("# axes:", 0) != 0)
    throw std::runtime_error("reference CSV: missing '# axes:' header at line " +
                             std::to_string(line_no));
  const std::vector<Real> counts = detail::parse_reals(line.substr(7), line_no);
  if (counts.empty() || counts.size() > 2)
    throw std::runtime_error("reference CSV: expected 1 or 2 axis sizes at line " +
                             std::to_string(line_no));
  ReferenceGrid grid;
  grid.provenance = Provenance::file;
  for (Real cnt : counts) {
    if (!next_line())
      throw std::runtime_error("reference CSV: missing axis row at line " +
                               std::to_string(line_no + 1));
    std::vector<Real> axis = detail::parse_reals(line, line_no);
    if (axis.size() != static_cast<std::size_t>(cnt))
      throw std::runtime_error("reference CSV: axis length mismatch at line " +
                               std::to_string(line_no));
    for (std::size_t i = 1; i < axis.size(); ++i)
      if (!(axis[i] > axis[i - 1]))
        throw std::runtime_error("reference CSV: non-monotone axis at line " +
                                 std::to_string(line_no));
    grid.axes.push_back(std::move(axis));
  }
  if (!next_line() || line.rfind("# components:", 0) != 0)
    throw std::runtime_error("reference CSV: missing '# components:' at line " +
                             std::to_string(line_no));
  const int k = std::stoi(line.substr(13));
  if (k < 1) throw std::runtime_error("reference CSV: bad component count");
  if (!next_line())
    throw std::runtime_error("reference CSV: truncated after components header");
  if (line.rfind("# provenance:", 0) == 0) {
    if (!next_line()) throw std::runtime_error("reference CSV: missing value rows");
  }
  const std::size_t n1 = grid.axes[0].size();
  const std::size_t n2 = grid.axes.size() > 1 ? grid.axes[1].size() : 1;
  grid.values.assign(k, std::vector<Real>(n1 * n2));
  for (int c = 0; c < k; ++c) {
    for (std::size_t r = 0; r < n1; ++r) {
      if (c + r > 0 && !next_line())
        throw std::runtime_error("reference CSV: missing value row at line " +
                                 std::to_string(line_no + 1));
      const std::vector<Real> vals = detail::parse_reals(line, line_no);
      if (vals.size() != n2)
        throw std::runtime_error("reference CSV: row length mismatch at line " +
                                 std::to_string(line_no));
      std::copy(vals.begin(), vals.end(), grid.values[c].begin() + r * n2);
    }
  }
  grid.validate();
  return grid;
}

} // namespace spinn
