#pragma once

// Scalar math shared by the whole library: the stable sigmoid and its
// first three derivatives, deterministic summation, and a small fixed-step
// RK4 kernel used both by the reference integrator and by problem factories
// that need a start state away from the domain origin.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinn {

using Real = double;

/// Raised when a numeric routine leaves the representable/finite range.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Sigmoid half-window that zeroes the third derivative at neighbour offsets.
inline Real default_delta_zeta() { return std::log(2.0 + std::sqrt(3.0)) / 2.0; }

/// Logistic sigmoid, branch-stable for arguments out to +-700 and beyond.
inline Real sigmoid(Real x) {
  if (x >= 0.0) {
    const Real e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const Real e = std::exp(x);
  return e / (1.0 + e);
}

// Derivatives expressed through the value s = sigmoid(x).
inline Real sigmoid_d1_from_s(Real s) { return s * (1.0 - s); }
inline Real sigmoid_d2_from_s(Real s) { return s * (1.0 - s) * (1.0 - 2.0 * s); }
inline Real sigmoid_d3_from_s(Real s) {
  const Real d1 = s * (1.0 - s);
  return d1 * (1.0 - 6.0 * s + 6.0 * s * s);
}

inline bool all_finite(std::span<const Real> v) {
  for (Real x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

/// Pairwise (cascade) summation; order fixed by the data layout, so the
/// result is independent of thread count and run-to-run identical.
inline Real pairwise_sum(std::span<const Real> v) {
  const std::size_t n = v.size();
  if (n <= 8) {
    Real s = 0.0;
    for (Real x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline Real l2_norm(std::span<const Real> v) {
  Real s = 0.0;
  for (Real x : v) s += x * x;
  return std::sqrt(s);
}

/// Dot product with four independent accumulators; the fixed association
/// order keeps results deterministic while letting the compiler vectorize.
inline Real dot4(const Real* a, const Real* b, int n) {
  Real s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

namespace detail {

/// Classical RK4 march of du/dx = f(u, x) from x0 to x1 in n uniform steps.
/// The state is updated in place. f(u, x, dudx).
template <class F>
void rk4_march(F&& f, std::vector<Real>& u, Real x0, Real x1, int n_steps) {
  const int k = static_cast<int>(u.size());
  const Real h = (x1 - x0) / n_steps;
  std::vector<Real> k1(k), k2(k), k3(k), k4(k), tmp(k);
  for (int s = 0; s < n_steps; ++s) {
    const Real x = x0 + s * h;
    f(u, x, k1);
    for (int i = 0; i < k; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
    f(tmp, x + 0.5 * h, k2);
    for (int i = 0; i < k; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
    f(tmp, x + 0.5 * h, k3);
    for (int i = 0; i < k; ++i) tmp[i] = u[i] + h * k3[i];
    f(tmp, x + h, k4);
    for (int i = 0; i < k; ++i)
      u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

} // namespace detail

/// FNV-1a, used to fingerprint resolved run configurations.
inline std::uint64_t fnv1a_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace spinn
