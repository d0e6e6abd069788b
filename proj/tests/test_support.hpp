#pragma once

// Shared helpers for the test suites: independent finite-difference oracles
// and random model generators. These deliberately avoid the library's own
// derivative code paths so they can act as oracles for them.

#include "spinn/net.hpp"
#include "spinn/spinn_model.hpp"

#include <random>

namespace testutil {

using spinn::Real;

inline Real fd_step(Real x) { return 1e-5 * std::max<Real>(1.0, std::abs(x)); }

/// Central difference of a scalar callable.
template <class F>
Real central_diff(F&& f, Real x, Real h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline bool close_rel(Real a, Real b, Real rel, Real floor = 1e-9) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), floor});
}

inline spinn::ShallowNet random_net(std::mt19937_64& rng, int n_hidden, int n_out,
                                    Real bound = 2.0) {
  spinn::ShallowNet net(n_hidden, n_out);
  std::uniform_real_distribution<Real> u(-bound, bound);
  for (auto& v : net.w1) v = u(rng);
  for (auto& v : net.b1) v = u(rng);
  for (auto& v : net.w2) v = u(rng);
  for (auto& v : net.b2) v = u(rng);
  return net;
}

inline spinn::SpinnModel random_spinn(std::mt19937_64& rng, int n_axes, int rank,
                                      int n_hidden) {
  spinn::SpinnModel m;
  m.rank = rank;
  for (int i = 0; i < n_axes; ++i) m.bodies.push_back(random_net(rng, n_hidden, rank));
  return m;
}

/// Brute-force product-sum evaluation used as the oracle for the separable
/// model; written without the library's forward().
inline Real spinn_bruteforce(const spinn::SpinnModel& m, std::span<const Real> pt) {
  Real total = 0.0;
  for (int j = 0; j < m.rank; ++j) {
    Real prod = 1.0;
    for (int i = 0; i < m.n_axes(); ++i) {
      const spinn::ShallowNet& b = m.bodies[i];
      Real out = b.b2[j];
      for (int k = 0; k < b.n_hidden; ++k) {
        const Real z = b.w1[k] * pt[i] + b.b1[k];
        Real a = 1.0 / (1.0 + std::exp(-z));
        if (b.activation == spinn::Activation::DoubleSigmoid)
          a -= 1.0 / (1.0 + std::exp(-(z - b.act_shift)));
        out += b.w2[static_cast<std::size_t>(j) * b.n_hidden + k] * a;
      }
      prod *= out;
    }
    total += prod;
  }
  return total;
}

} // namespace testutil
