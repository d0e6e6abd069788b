#pragma once

// Separable product model: one body network per input axis, each with `rank`
// outputs; the prediction is the rank-sum of per-axis output products.

#include "spinn/net.hpp"

namespace spinn {

struct SpinnModel {
  std::vector<ShallowNet> bodies; // bodies[i] evaluates axis i, n_out == rank
  int rank = 1;

  int n_axes() const { return static_cast<int>(bodies.size()); }

  void validate() const {
    if (bodies.empty()) throw std::invalid_argument("SpinnModel: no bodies");
    for (const ShallowNet& b : bodies) {
      b.validate();
      if (b.n_out != rank)
        throw std::invalid_argument("SpinnModel: every body must have n_out == rank");
    }
  }
};

inline Real spinn_forward(const SpinnModel& model, std::span<const Real> point) {
  if (static_cast<int>(point.size()) != model.n_axes())
    throw std::invalid_argument("spinn_forward: point dimension != number of axes");
  std::vector<Real> prod(model.rank, 1.0);
  for (int i = 0; i < model.n_axes(); ++i) {
    const std::vector<Real> out = forward(model.bodies[i], point[i]);
    for (int j = 0; j < model.rank; ++j) prod[j] *= out[j];
  }
  return pairwise_sum(prod);
}

/// Mixed partial with per-axis derivative orders (each <= 2 by contract,
/// <= 3 supported). Separability: only the designated axis body is
/// differentiated inside each product.
inline Real spinn_partials(const SpinnModel& model, std::span<const Real> point,
                           std::span<const int> orders) {
  if (static_cast<int>(point.size()) != model.n_axes() ||
      static_cast<int>(orders.size()) != model.n_axes())
    throw std::invalid_argument("spinn_partials: dimension mismatch");
  for (int o : orders)
    if (o < 0 || o > 3) throw std::invalid_argument("spinn_partials: unsupported order");
  std::vector<Real> prod(model.rank, 1.0);
  for (int i = 0; i < model.n_axes(); ++i) {
    const EvalBundle eb = derivatives(model.bodies[i], point[i], orders[i]);
    const std::vector<Real>* f = &eb.value;
    if (orders[i] == 1) f = &eb.d1;
    else if (orders[i] == 2) f = &eb.d2;
    else if (orders[i] == 3) f = &eb.d3;
    for (int j = 0; j < model.rank; ++j) prod[j] *= (*f)[j];
  }
  return pairwise_sum(prod);
}

} // namespace spinn
