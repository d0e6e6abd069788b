#pragma once

// Relative L2 error and the generalization ratio mu, plus the per-run report
// record and its CSV emission.

#include "spinn/init.hpp"
#include "spinn/reference.hpp"

#include <cstdio>
#include <fstream>
#include <optional>

namespace spinn {

inline Real rel_l2(std::span<const Real> pred, std::span<const Real> ref) {
  if (pred.size() != ref.size() || pred.empty())
    throw std::invalid_argument("rel_l2: size mismatch or empty input");
  Real num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Real d = pred[i] - ref[i];
    num += d * d;
    den += ref[i] * ref[i];
  }
  if (den == 0.0) throw std::invalid_argument("rel_l2: reference is identically zero");
  return std::sqrt(num) / std::sqrt(den);
}

struct MuResult {
  Real mu;
  Real eps_train;   // pooled error on the training parameter grid
  Real eps_shifted; // pooled error on the half-shifted grid
  std::vector<Real> per_q_train, per_q_shifted;
};

/// Pooled-error generalization ratio. References come from the exact solution
/// when available, otherwise from the RK4 oracle.
inline MuResult generalization_mu(const GeneralizedNet& net,
                                  const std::function<OdeSystem(Real)>& family, int component,
                                  std::span<const Real> q_train, std::span<const Real> eval_x,
                                  int substeps = 16) {
  if (q_train.size() < 2) throw std::invalid_argument("generalization_mu: need >= 2 q values");
  const Real dq = q_train[1] - q_train[0];
  const std::size_t n_e = eval_x.size();

  // Batched prediction: coordinate-body outputs on the eval grid once, then
  // one selector evaluation per parameter value.
  const int r = net.u_body.n_out;
  std::vector<Real> uvals(n_e * r);
  for (std::size_t i = 0; i < n_e; ++i) {
    const std::vector<Real> u = forward(net.u_body, eval_x[i]);
    std::copy(u.begin(), u.end(), uvals.begin() + i * r);
  }
  auto pooled = [&](std::span<const Real> qs, std::vector<Real>& per_q) {
    Real num = 0.0, den = 0.0;
    per_q.clear();
    std::vector<Real> ref_vals;
    for (Real q : qs) {
      const OdeSystem sys = family(q);
      ReferenceGrid ref = sys.has_exact() ? exact_grid(sys, eval_x)
                                          : integrate_ode(sys, eval_x, substeps);
      const std::vector<Real> sel = forward(net.q_body, q);
      Real qn = 0.0, qd = 0.0;
      for (std::size_t i = 0; i < n_e; ++i) {
        Real pred = 0.0;
        const Real* row = uvals.data() + i * r;
        for (int j = 0; j < r; ++j) pred += row[j] * sel[j];
        const Real d = pred - ref.values[component][i];
        qn += d * d;
        qd += ref.values[component][i] * ref.values[component][i];
      }
      num += qn;
      den += qd;
      per_q.push_back(qd > 0 ? std::sqrt(qn / qd) : 0.0);
    }
    if (den == 0.0) throw std::invalid_argument("generalization_mu: zero reference norm");
    return std::sqrt(num) / std::sqrt(den);
  };

  MuResult res;
  res.eps_train = pooled(q_train, res.per_q_train);
  std::vector<Real> q_half(q_train.size() - 1);
  for (std::size_t j = 0; j + 1 < q_train.size(); ++j) q_half[j] = q_train[j] + 0.5 * dq;
  res.eps_shifted = pooled(q_half, res.per_q_shifted);
  if (res.eps_train == 0.0 && res.eps_shifted == 0.0)
    throw numeric_error("generalization_mu degenerate: both errors zero");
  res.mu = res.eps_train / res.eps_shifted;
  return res;
}

struct EvalReport {
  std::vector<Real> rel_l2;
  int n_eval_points = 0;
  std::optional<Real> mu;
  long lbfgs_iterations = 0;
  double wall_ms = 0.0;
  long epochs = 0;
};

inline void append_report_csv(const std::string& path, const std::string& problem,
                              const EvalReport& rep, std::uint64_t config_hash,
                              bool write_header) {
  std::ofstream f(path, write_header ? std::ios::trunc : std::ios::app);
  if (!f) throw std::runtime_error("cannot open report file " + path);
  if (write_header) f << "problem,component,rel_l2,mu,lbfgs_iters,wall_ms,config_hash\n";
  char buf[64];
  for (std::size_t c = 0; c < rep.rel_l2.size(); ++c) {
    std::snprintf(buf, sizeof buf, "%.6e", rep.rel_l2[c]);
    f << problem << ',' << c << ',' << buf << ',';
    if (rep.mu) {
      std::snprintf(buf, sizeof buf, "%.6e", *rep.mu);
      f << buf;
    }
    f << ',' << rep.lbfgs_iterations << ',' << static_cast<long>(rep.wall_ms) << ','
      << std::hex << config_hash << std::dec << '\n';
  }
}

} // namespace spinn
