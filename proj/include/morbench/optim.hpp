#pragma once

// rmsprop:  E <- rho * E + (1 - rho) * g^2;  theta <- theta - lr * g / sqrt(E + eps)

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "morbench/error.hpp"

namespace morbench {

struct RmspropConfig {
  double learning_rate = 0.001;
  double rho = 0.9;
  double epsilon = 1e-7;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("rmsprop learning_rate must be positive");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rmsprop rho must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("rmsprop epsilon must be positive");
  }
};

// One accumulator per parameter tensor, matched by position.
struct RmspropState {
  RmspropConfig config;
  std::vector<std::vector<double>> accumulators;

  RmspropState() = default;
  explicit RmspropState(RmspropConfig c) : config(c) {}
};

// Views over the flat storage of a model's tensors.
using ParamViews = std::vector<std::span<double>>;
using GradViews = std::vector<std::span<const double>>;

// Applies one update to every tensor. Throws before touching anything when a
// gradient is non-finite or shapes disagree.
inline void rmsprop_step(const ParamViews& params, const GradViews& grads, RmspropState& state) {
  if (params.size() != grads.size()) throw ShapeError("rmsprop: parameter and gradient counts differ");
  if (state.accumulators.empty()) {
    for (const auto& p : params) state.accumulators.emplace_back(p.size(), 0.0);
  }
  if (state.accumulators.size() != params.size()) throw ShapeError("rmsprop: state does not match parameters");
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != grads[t].size() || state.accumulators[t].size() != params[t].size())
      throw ShapeError("rmsprop: tensor " + std::to_string(t) + " shape mismatch");
    for (double g : grads[t])
      if (!std::isfinite(g)) throw ValidationError("rmsprop: non-finite gradient in tensor " + std::to_string(t));
  }
  const auto& c = state.config;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& acc = state.accumulators[t];
    auto p = params[t];
    auto g = grads[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc[i] = c.rho * acc[i] + (1.0 - c.rho) * g[i] * g[i];
      p[i] -= c.learning_rate * g[i] / std::sqrt(acc[i] + c.epsilon);
    }
  }
}

}  // namespace morbench
