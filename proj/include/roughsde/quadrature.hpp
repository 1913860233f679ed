#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace roughsde {

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

// m-point Gauss-Legendre rule by Newton iteration on P_m.
inline GaussRule gauss_legendre(int m) {
  if (m < 1) throw std::invalid_argument("gauss_legendre needs m >= 1");
  GaussRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (m == 1) p0 = 1.0;
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[m - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[m - 1 - i] = w;
  }
  return rule;
}

}  // namespace roughsde
