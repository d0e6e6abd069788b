#pragma once

// Benchmark ODE systems and PDEs as residual operators. The stored operator
// is always N with residual R[u] = du/dx + N[u, x]; systems stated as
// du/dt = f are converted via N = -f, so one residual formula serves all.

#include "spinn/math.hpp"

#include <map>
#include <optional>

namespace spinn {

struct OdeSystem {
  std::string name;
  int n_components = 1;
  Real x_lo = 0.0, x_hi = 1.0;
  std::vector<Real> initial; // u(x_lo)

  // N[u, x]; out has n_components entries.
  std::function<void(std::span<const Real>, Real, std::span<Real>)> rhs_n;
  // dN/du, row-major K x K. Needed for non-detached gradients and D2 weights.
  std::function<void(std::span<const Real>, Real, std::span<Real>)> rhs_n_jac;
  // Explicit dN/dx at fixed u.
  std::function<void(std::span<const Real>, Real, std::span<Real>)> rhs_n_dx;
  // Exact solution when known.
  std::function<void(Real, std::span<Real>)> exact;

  std::map<std::string, Real> params;
  // Optional per-component half/double crossing scales; unset by default.
  std::optional<Real> sigma_half, sigma_twice;

  Real span() const { return x_hi - x_lo; }
  bool has_exact() const { return static_cast<bool>(exact); }

  std::vector<Real> n_of(std::span<const Real> u, Real x) const {
    std::vector<Real> out(n_components);
    rhs_n(u, x, out);
    return out;
  }
};

inline OdeSystem harmonic_oscillator(Real T = 100.0, Real m = 1.0, Real k = 1.0) {
  if (T <= 0 || m <= 0 || k <= 0)
    throw std::invalid_argument("harmonic_oscillator: T, m, k must be positive");
  OdeSystem s;
  s.name = "harmonic";
  s.n_components = 2;
  s.x_lo = 0.0;
  s.x_hi = T;
  s.initial = {1.0, 0.0};
  const Real km = k / m;
  s.rhs_n = [km](std::span<const Real> u, Real, std::span<Real> out) {
    out[0] = -u[1];
    out[1] = km * u[0];
  };
  s.rhs_n_jac = [km](std::span<const Real>, Real, std::span<Real> j) {
    j[0] = 0.0; j[1] = -1.0;
    j[2] = km;  j[3] = 0.0;
  };
  s.rhs_n_dx = [](std::span<const Real>, Real, std::span<Real> d) { d[0] = d[1] = 0.0; };
  const Real w = std::sqrt(km);
  s.exact = [w](Real t, std::span<Real> out) {
    out[0] = std::cos(w * t);
    out[1] = -w * std::sin(w * t);
  };
  s.params = {{"T", T}, {"m", m}, {"k", k}};
  return s;
}

inline OdeSystem charged_sphere(Real a = 0.01, Real R = 10.0) {
  if (!(a > 0.0) || !(a < R)) throw std::invalid_argument("charged_sphere: need 0 < a < R");
  OdeSystem s;
  s.name = "sphere";
  s.n_components = 1;
  s.x_lo = a;
  s.x_hi = R;
  s.initial = {1.0 / a};
  s.rhs_n = [](std::span<const Real>, Real r, std::span<Real> out) { out[0] = 1.0 / (r * r); };
  s.rhs_n_jac = [](std::span<const Real>, Real, std::span<Real> j) { j[0] = 0.0; };
  s.rhs_n_dx = [](std::span<const Real>, Real r, std::span<Real> d) { d[0] = -2.0 / (r * r * r); };
  s.exact = [](Real r, std::span<Real> out) { out[0] = 1.0 / r; };
  s.params = {{"a", a}, {"R", R}};
  return s;
}

inline OdeSystem charged_plane(Real Omega = 10.0, Real X = 100.0) {
  if (X <= 0) throw std::invalid_argument("charged_plane: X must be positive");
  OdeSystem s;
  s.name = "plane";
  s.n_components = 1;
  s.x_lo = 0.0;
  s.x_hi = X;
  s.initial = {0.0};
  s.rhs_n = [Omega](std::span<const Real>, Real, std::span<Real> out) { out[0] = -Omega; };
  s.rhs_n_jac = [](std::span<const Real>, Real, std::span<Real> j) { j[0] = 0.0; };
  s.rhs_n_dx = [](std::span<const Real>, Real, std::span<Real> d) { d[0] = 0.0; };
  s.exact = [Omega](Real x, std::span<Real> out) { out[0] = Omega * x; };
  s.params = {{"Omega", Omega}, {"X", X}};
  return s;
}

inline OdeSystem exponential_growth(Real T = 10.0) {
  if (T <= 0) throw std::invalid_argument("exponential_growth: T must be positive");
  OdeSystem s;
  s.name = "expgrowth";
  s.n_components = 1;
  s.x_lo = 0.0;
  s.x_hi = T;
  s.initial = {1.0};
  s.rhs_n = [](std::span<const Real> u, Real, std::span<Real> out) { out[0] = -u[0]; };
  s.rhs_n_jac = [](std::span<const Real>, Real, std::span<Real> j) { j[0] = -1.0; };
  s.rhs_n_dx = [](std::span<const Real>, Real, std::span<Real> d) { d[0] = 0.0; };
  s.exact = [](Real t, std::span<Real> out) { out[0] = std::exp(t); };
  s.params = {{"T", T}};
  return s;
}

inline OdeSystem lorenz(Real T = 20.0, Real sigma = 10.0, Real rho = 28.0, Real beta = 8.0 / 3.0) {
  if (T <= 0) throw std::invalid_argument("lorenz: T must be positive");
  OdeSystem s;
  s.name = "lorenz";
  s.n_components = 3;
  s.x_lo = 0.0;
  s.x_hi = T;
  s.initial = {1.0, 1.0, 1.0};
  s.rhs_n = [sigma, rho, beta](std::span<const Real> u, Real, std::span<Real> out) {
    out[0] = -sigma * (u[1] - u[0]);
    out[1] = -u[0] * (rho - u[2]) + u[1];
    out[2] = -u[0] * u[1] + beta * u[2];
  };
  s.rhs_n_jac = [sigma, rho, beta](std::span<const Real> u, Real, std::span<Real> j) {
    j[0] = sigma;          j[1] = -sigma; j[2] = 0.0;
    j[3] = -(rho - u[2]);  j[4] = 1.0;    j[5] = u[0];
    j[6] = -u[1];          j[7] = -u[0];  j[8] = beta;
  };
  s.rhs_n_dx = [](std::span<const Real>, Real, std::span<Real> d) { d[0] = d[1] = d[2] = 0.0; };
  s.params = {{"T", T}, {"sigma", sigma}, {"rho", rho}, {"beta", beta}};
  return s;
}

// ---------------------------------------------------------------------------
// Relativistic slingshot, Example 5 normalization: state (h~, x, y~, z~).
// The laser envelope has compact support on [0, 4*T_L]; outside the pulse the
// vector potential is zero so the domain may extend past the pulse.
// ---------------------------------------------------------------------------

namespace detail {

struct SlingshotParams {
  Real eps, l_prime, a0;
  Real t_period = 1.0;       // T_L
  Real t_pulse = 4.0;        // pulse duration 4*T_L
};

inline Real sling_envelope_y(const SlingshotParams& p, Real t) {
  if (t < 0.0 || t > p.t_pulse) return 0.0;
  const Real s = std::sin(M_PI * t / p.t_pulse);
  return p.a0 * std::sin(2.0 * M_PI * t / p.t_period) * s * s;
}
inline Real sling_envelope_z(const SlingshotParams& p, Real t) {
  if (t < 0.0 || t > p.t_pulse) return 0.0;
  const Real s = std::sin(M_PI * t / p.t_pulse);
  return p.a0 * std::cos(2.0 * M_PI * t / p.t_period) * s * s;
}
inline Real sling_envelope_y_dt(const SlingshotParams& p, Real t) {
  if (t < 0.0 || t > p.t_pulse) return 0.0;
  const Real w = 2.0 * M_PI / p.t_period, q = M_PI / p.t_pulse;
  const Real s = std::sin(q * t);
  return p.a0 * (w * std::cos(w * t) * s * s + std::sin(w * t) * 2.0 * s * std::cos(q * t) * q);
}
inline Real sling_envelope_z_dt(const SlingshotParams& p, Real t) {
  if (t < 0.0 || t > p.t_pulse) return 0.0;
  const Real w = 2.0 * M_PI / p.t_period, q = M_PI / p.t_pulse;
  const Real s = std::sin(q * t);
  return p.a0 * (-w * std::sin(w * t) * s * s + std::cos(w * t) * 2.0 * s * std::cos(q * t) * q);
}

struct SlingshotTerms {
  Real uy, uz, uperp2, ex, b, inv1b, h;
};

inline SlingshotTerms sling_terms(const SlingshotParams& p, std::span<const Real> u, Real t) {
  SlingshotTerms m;
  m.h = u[0]; // h~
  if (m.h == 0.0) throw numeric_error("slingshot: singular state h~ = 0");
  m.uy = sling_envelope_y(p, t) - u[2];
  m.uz = sling_envelope_z(p, t) - u[3];
  m.uperp2 = m.uy * m.uy + m.uz * m.uz;
  m.ex = std::tanh(u[1] / (4.0 * p.l_prime));
  const Real eh = p.eps * m.h;
  m.b = (1.0 + m.uperp2 - eh * eh) / (2.0 * eh * eh);
  m.inv1b = 1.0 / (1.0 + m.b);
  return m;
}

// f = du/dt (so N = -f).
inline void sling_f(const SlingshotParams& p, std::span<const Real> u, Real t,
                    std::span<Real> f) {
  const SlingshotTerms m = sling_terms(p, u, t);
  f[0] = (m.ex - m.uperp2 / (1.0 + m.uperp2)) * m.inv1b;
  f[1] = m.b * m.inv1b;
  f[2] = m.uy / (m.h * (1.0 + m.b));
  f[3] = m.uz / (m.h * (1.0 + m.b));
}

// Row-major 4x4 Jacobian df/du and explicit df/dt, both derived from the
// closed forms above; verified against finite differences in the tests.
inline void sling_jac(const SlingshotParams& p, std::span<const Real> u, Real t,
                      std::span<Real> jac, std::span<Real> dfdt) {
  const SlingshotTerms m = sling_terms(p, u, t);
  const Real eps = p.eps;
  const Real eh2 = eps * m.h * eps * m.h;

  // Partials of the shared pieces.
  // uperp2 w.r.t. (h,x,y,z): (0, 0, -2uy, -2uz); w.r.t. t: 2uy*ay' + 2uz*az'
  const Real du2_dy = -2.0 * m.uy, du2_dz = -2.0 * m.uz;
  const Real du2_dt = 2.0 * m.uy * sling_envelope_y_dt(p, t) + 2.0 * m.uz * sling_envelope_z_dt(p, t);
  // b = (1+uperp2)/(2 eps^2 h^2) - 1/2
  const Real db_du2 = 1.0 / (2.0 * eh2);
  const Real db_dh = -(1.0 + m.uperp2) / (eps * eps * m.h * m.h * m.h);
  // ex = tanh(x / 4l')
  const Real dex_dx = (1.0 - m.ex * m.ex) / (4.0 * p.l_prime);
  // g = ex - uperp2/(1+uperp2); dg/duperp2 = -1/(1+uperp2)^2
  const Real g = m.ex - m.uperp2 / (1.0 + m.uperp2);
  const Real dg_du2 = -1.0 / ((1.0 + m.uperp2) * (1.0 + m.uperp2));
  const Real inv1b2 = m.inv1b * m.inv1b;

  auto set = [&](int r, int c, Real v) { jac[r * 4 + c] = v; };

  // f0 = g/(1+b)
  set(0, 0, -g * inv1b2 * db_dh);
  set(0, 1, dex_dx * m.inv1b);
  set(0, 2, dg_du2 * du2_dy * m.inv1b - g * inv1b2 * db_du2 * du2_dy);
  set(0, 3, dg_du2 * du2_dz * m.inv1b - g * inv1b2 * db_du2 * du2_dz);
  // f1 = b/(1+b); df1/db = 1/(1+b)^2
  set(1, 0, inv1b2 * db_dh);
  set(1, 1, 0.0);
  set(1, 2, inv1b2 * db_du2 * du2_dy);
  set(1, 3, inv1b2 * db_du2 * du2_dz);
  // f2 = uy/(h(1+b))
  const Real denom = m.h * (1.0 + m.b);
  set(2, 0, -m.uy / (denom * denom) * (1.0 + m.b + m.h * db_dh));
  set(2, 1, 0.0);
  set(2, 2, (-1.0 * denom - m.uy * m.h * db_du2 * du2_dy) / (denom * denom));
  set(2, 3, (-m.uy * m.h * db_du2 * du2_dz) / (denom * denom));
  // f3 = uz/(h(1+b))
  set(3, 0, -m.uz / (denom * denom) * (1.0 + m.b + m.h * db_dh));
  set(3, 1, 0.0);
  set(3, 2, (-m.uz * m.h * db_du2 * du2_dy) / (denom * denom));
  set(3, 3, (-1.0 * denom - m.uz * m.h * db_du2 * du2_dz) / (denom * denom));

  // Explicit time dependence enters through the envelopes only.
  const Real duy_dt = sling_envelope_y_dt(p, t);
  const Real duz_dt = sling_envelope_z_dt(p, t);
  const Real db_dt = db_du2 * du2_dt;
  dfdt[0] = dg_du2 * du2_dt * m.inv1b - g * inv1b2 * db_dt;
  dfdt[1] = inv1b2 * db_dt;
  dfdt[2] = (duy_dt * denom - m.uy * m.h * db_dt) / (denom * denom);
  dfdt[3] = (duz_dt * denom - m.uz * m.h * db_dt) / (denom * denom);
}

} // namespace detail

inline OdeSystem relativistic_slingshot(Real T = 10.0, Real t0 = 0.0, Real eps = 4.0 * M_PI,
                                        Real l_prime = 0.01 * 2.0 * M_PI, Real a0 = 5.0) {
  if (T <= t0) throw std::invalid_argument("relativistic_slingshot: need T > t0");
  detail::SlingshotParams p{eps, l_prime, a0};
  OdeSystem s;
  s.name = "slingshot";
  s.n_components = 4;
  s.x_lo = t0;
  s.x_hi = T;
  std::vector<Real> u0 = {1.0 / eps, 0.0, 0.0, 0.0}; // h = 1 at t = 0
  if (t0 > 0.0) {
    // Start state away from the origin: advance the exact initial state with
    // a fine fixed-step RK4 march.
    const int steps = std::max(2000, static_cast<int>(t0 * 4000));
    detail::rk4_march(
        [&p](const std::vector<Real>& u, Real t, std::vector<Real>& f) {
          detail::sling_f(p, u, t, f);
        },
        u0, 0.0, t0, steps);
  }
  s.initial = u0;
  s.rhs_n = [p](std::span<const Real> u, Real t, std::span<Real> out) {
    Real f[4];
    detail::sling_f(p, u, t, f);
    for (int i = 0; i < 4; ++i) out[i] = -f[i];
  };
  s.rhs_n_jac = [p](std::span<const Real> u, Real t, std::span<Real> j) {
    Real dfdt[4];
    detail::sling_jac(p, u, t, j, dfdt);
    for (int i = 0; i < 16; ++i) j[i] = -j[i];
  };
  s.rhs_n_dx = [p](std::span<const Real> u, Real t, std::span<Real> d) {
    Real jac[16], dfdt[4];
    detail::sling_jac(p, u, t, jac, dfdt);
    for (int i = 0; i < 4; ++i) d[i] = -dfdt[i];
  };
  s.params = {{"T", T}, {"t0", t0}, {"eps", eps}, {"l_prime", l_prime}, {"a0", a0}};
  return s;
}

// ---------------------------------------------------------------------------
// PDE systems (2D, axes t and x). Residual has the structured form
//   R = u_t + coef_ux * u_x + coef_uxx * u_xx + g(u)
// which covers the catalog and keeps detaching and weighting closed-form.
// ---------------------------------------------------------------------------

struct PdeSystem {
  std::string name;
  Real t_lo = 0.0, t_hi = 1.0;
  Real x_lo = -1.0, x_hi = 1.0;
  Real coef_ux = 0.0, coef_uxx = 0.0;
  std::function<Real(Real)> g;       // pointwise term g(u)
  std::function<Real(Real)> g_prime; // dg/du
  std::function<Real(Real)> initial; // u(t_lo, x)
  std::function<Real(Real)> initial_dx;
  std::function<Real(Real)> initial_dxx;
  std::function<Real(Real, Real)> exact;    // u(t, x) when known
  std::function<Real(Real, Real)> exact_dx; // du/dx when known
  bool periodic = true;

  Real residual(Real u, Real ut, Real ux, Real uxx) const {
    return ut + coef_ux * ux + coef_uxx * uxx + (g ? g(u) : 0.0);
  }
  /// Time-derivative right-hand side f with u_t = f (so N_time = -f).
  Real time_rhs(Real u, Real ux, Real uxx) const {
    return -(coef_ux * ux + coef_uxx * uxx + (g ? g(u) : 0.0));
  }
  bool has_exact() const { return static_cast<bool>(exact); }
};

inline PdeSystem allen_cahn() {
  PdeSystem s;
  s.name = "allen-cahn";
  s.t_lo = 0.0; s.t_hi = 1.0;
  s.x_lo = -1.0; s.x_hi = 1.0;
  s.coef_uxx = -0.0001;
  s.g = [](Real u) { return 5.0 * u * u * u - 5.0 * u; };
  s.g_prime = [](Real u) { return 15.0 * u * u - 5.0; };
  s.initial = [](Real x) { return x * x * std::cos(M_PI * x); };
  s.initial_dx = [](Real x) {
    return 2.0 * x * std::cos(M_PI * x) - M_PI * x * x * std::sin(M_PI * x);
  };
  s.initial_dxx = [](Real x) {
    return 2.0 * std::cos(M_PI * x) - 4.0 * M_PI * x * std::sin(M_PI * x) -
           M_PI * M_PI * x * x * std::cos(M_PI * x);
  };
  s.periodic = true;
  return s;
}

inline PdeSystem advection(Real c = 80.0) {
  PdeSystem s;
  s.name = "advection";
  s.t_lo = 0.0; s.t_hi = 1.0;
  s.x_lo = 0.0; s.x_hi = 2.0 * M_PI;
  s.coef_ux = c;
  s.g = [](Real) { return 0.0; };
  s.g_prime = [](Real) { return 0.0; };
  s.initial = [](Real x) { return std::sin(x); };
  s.initial_dx = [](Real x) { return std::cos(x); };
  s.initial_dxx = [](Real x) { return -std::sin(x); };
  s.exact = [c](Real t, Real x) { return std::sin(x - c * t); };
  s.exact_dx = [c](Real t, Real x) { return std::cos(x - c * t); };
  s.periodic = true;
  return s;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct ProblemRegistry {
  static const std::vector<std::string>& names() {
    static const std::vector<std::string> v = {"harmonic",  "sphere", "plane",
                                               "expgrowth", "slingshot", "lorenz",
                                               "allen-cahn", "advection"};
    return v;
  }

  static bool is_pde(const std::string& name) {
    return name == "allen-cahn" || name == "advection";
  }

  static bool known(const std::string& name) {
    const auto& v = names();
    return std::find(v.begin(), v.end(), name) != v.end();
  }

  static OdeSystem make_ode(const std::string& name,
                            const std::map<std::string, Real>& p = {}) {
    auto get = [&p](const char* key, Real dflt) {
      auto it = p.find(key);
      return it == p.end() ? dflt : it->second;
    };
    if (name == "harmonic")
      return harmonic_oscillator(get("T", 100.0), get("m", 1.0), get("k", 1.0));
    if (name == "sphere") return charged_sphere(get("a", 0.01), get("R", 10.0));
    if (name == "plane") return charged_plane(get("Omega", 10.0), get("X", 100.0));
    if (name == "expgrowth") return exponential_growth(get("T", 10.0));
    if (name == "slingshot")
      return relativistic_slingshot(get("T", 10.0), get("t0", 0.0), get("eps", 4.0 * M_PI),
                                    get("l_prime", 0.01 * 2.0 * M_PI), get("a0", 5.0));
    if (name == "lorenz")
      return lorenz(get("T", 20.0), get("sigma", 10.0), get("rho", 28.0), get("beta", 8.0 / 3.0));
    throw std::invalid_argument("unknown ODE problem: " + name);
  }

  static PdeSystem make_pde(const std::string& name,
                            const std::map<std::string, Real>& p = {}) {
    auto get = [&p](const char* key, Real dflt) {
      auto it = p.find(key);
      return it == p.end() ? dflt : it->second;
    };
    if (name == "allen-cahn") return allen_cahn();
    if (name == "advection") return advection(get("c", 80.0));
    throw std::invalid_argument("unknown PDE problem: " + name);
  }
};

} // namespace spinn
