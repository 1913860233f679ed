#include "roughsde/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "roughsde/rng.hpp"

namespace roughsde {

namespace {

constexpr std::array<double, 4> kGaussNodes = {-0.8611363115940526, -0.3399810435848563,
                                                0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights = {0.3478548451374538, 0.6521451548625461,
                                                  0.6521451548625461, 0.3478548451374538};

}  // namespace

double increment_cov_quadrature(const Kernel& k, const Rect<double>& r, int m) {
  k.require_rough();
  if (m < 1) throw DomainError("quadrature needs at least one panel per axis");
  if (r.interiors_overlap())
    throw DomainError("intervals overlap: the increment integrand is singular");

  // Order the intervals so that [a,b] lies to the left of [c,d].
  double a = r.s_lo, b = r.s_hi, c = r.t_lo, d = r.t_hi;
  if (c < a) {
    std::swap(a, c);
    std::swap(b, d);
  }
  const double left = b - a;
  const double right = d - c;
  if (left == 0.0 || right == 0.0) return 0.0;
  const double gap = c - b;

  const double hurst = k.hurst();
  const double expo = 2.0 * hurst - 2.0;
  // Grading exponent q: near the facing corner the transformed integrand
  // behaves like rho^{2qH-1} in polar coordinates.
  const double q = gap < std::max(left, right) ? std::max(1.0, std::ceil(1.5 / hurst)) : 1.0;

  const double panel = 1.0 / m;
  double total = 0.0;
  for (int px = 0; px < m; ++px) {
    double row = 0.0;
    for (std::size_t gx = 0; gx < kGaussNodes.size(); ++gx) {
      const double x = panel * (px + 0.5 * (kGaussNodes[gx] + 1.0));
      const double xq = std::pow(x, q);
      const double jx = left * q * std::pow(x, q - 1.0) * 0.5 * panel * kGaussWeights[gx];
      double inner = 0.0;
      for (int py = 0; py < m; ++py) {
        for (std::size_t gy = 0; gy < kGaussNodes.size(); ++gy) {
          const double y = panel * (py + 0.5 * (kGaussNodes[gy] + 1.0));
          const double yq = std::pow(y, q);
          const double jy = right * q * std::pow(y, q - 1.0) * 0.5 * panel * kGaussWeights[gy];
          const double dist = gap + left * xq + right * yq;
          inner += jy * std::pow(dist, expo);
        }
      }
      row += jx * inner;
    }
    total += row;
  }
  return hurst * (2.0 * hurst - 1.0) * total;
}

NegativityReport check_increment_negativity(double hurst, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("need at least one sample");
  const Kernel k(hurst);
  const RngStream rng{seed, 0};
  NegativityReport rep;
  rep.hurst = hurst;
  rep.samples = samples;
  rep.max_value = -std::numeric_limits<double>::infinity();
  std::uint64_t block = 0;
  for (int i = 0; i < samples;) {
    const auto u = rng.uniform_pair(2 * block);
    const auto w = rng.uniform_pair(2 * block + 1);
    ++block;
    std::array<double, 4> p{5 * u[0], 5 * u[1], 5 * w[0], 5 * w[1]};
    std::sort(p.begin(), p.end());
    const bool shared = i % 10 == 0;
    if (shared) p[2] = p[1];
    if (!(p[0] < p[1] && p[2] < p[3])) continue;
    const double v = rect_increment(k, Rect<double>(p[0], p[1], p[2], p[3]));
    rep.negative += v < 0.0;
    rep.shared_endpoint += shared;
    rep.max_value = std::max(rep.max_value, v);
    rep.max_abs = std::max(rep.max_abs, std::abs(v));
    ++i;
  }
  if (hurst < 0.5)
    rep.pass = rep.negative == samples;
  else if (hurst == 0.5)
    rep.pass = rep.max_abs < 1e-12;
  return rep;
}

}  // namespace roughsde
