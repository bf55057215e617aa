#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace morl {

/// Adaptive-moment estimation with bias correction. ascend() maximizes,
/// descend() minimizes.
struct AdamState {
  std::vector<double> m, v;
  int t = 0;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void ascend(std::vector<double>& params, const std::vector<double>& grad,
              double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t;
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
      v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
      params[i] += lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }

  void descend(std::vector<double>& params, const std::vector<double>& grad,
               double lr) {
    std::vector<double> neg(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) neg[i] = -grad[i];
    ascend(params, neg, lr);
  }
};

}  // namespace morl
