#pragma once

// Central finite-difference checks shared by the gradient tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace morbench::gradcheck {

inline constexpr double kStep = 1e-5;

// |a - b| / max(|a|, |b|, 1e-3). The floor keeps gradients that are zero up
// to rounding from dividing by nothing.
inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

// Worst relative error over every coordinate of every parameter view.
// `loss` is re-evaluated after each in-place perturbation.
template <typename Params, typename Grads>
double worst_rel_error(const Params& params, const Grads& grads, const std::function<double()>& loss) {
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      double& x = params[t][i];
      const double saved = x;
      x = saved + kStep;
      const double up = loss();
      x = saved - kStep;
      const double down = loss();
      x = saved;
      worst = std::max(worst, rel_error(grads[t][i], (up - down) / (2 * kStep)));
    }
  }
  return worst;
}

}  // namespace morbench::gradcheck
