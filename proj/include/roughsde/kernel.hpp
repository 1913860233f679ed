#pragma once

// Covariance analytics of fractional Brownian motion.
//
//   R(s,t) = 1/2 (t^{2H} + s^{2H} - |t-s|^{2H})
//
// Everything here is a pure function of (H, times). The kernel is templated
// on the scalar so the same formulas can be evaluated in long double when a
// higher-precision reference is wanted.

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "roughsde/error.hpp"

namespace roughsde {

template <typename Scalar>
Scalar abs_pow(Scalar x, Scalar exponent) {
  using std::abs;
  using std::exp;
  using std::log;
  const Scalar ax = abs(x);
  if (ax == Scalar(0)) return Scalar(0);
  return exp(exponent * log(ax));
}

template <typename Scalar = double>
class CovKernel {
 public:
  explicit CovKernel(Scalar hurst) : hurst_(hurst) {
    if (!(hurst > Scalar(0) && hurst < Scalar(1)))
      throw DomainError("hurst parameter must lie in (0,1)");
  }

  Scalar hurst() const { return hurst_; }
  Scalar two_h() const { return Scalar(2) * hurst_; }

  // Operations that rely on negatively correlated increments.
  void require_rough() const {
    if (!(hurst_ < Scalar(0.5)))
      throw DomainError("operation requires hurst < 1/2");
  }
  void require_rough_regime() const {
    if (!(hurst_ > Scalar(1) / Scalar(3) && hurst_ < Scalar(0.5)))
      throw DomainError("operation requires hurst in (1/3, 1/2)");
  }

 private:
  Scalar hurst_;
};

using Kernel = CovKernel<double>;

// Axis-aligned rectangle [s_lo,s_hi] x [t_lo,t_hi].
template <typename Scalar = double>
struct Rect {
  Scalar s_lo, s_hi, t_lo, t_hi;

  Rect(Scalar s0, Scalar s1, Scalar t0, Scalar t1)
      : s_lo(s0), s_hi(s1), t_lo(t0), t_hi(t1) {
    if (!(s0 <= s1 && t0 <= t1))
      throw DomainError("rectangle endpoints must be ordered");
  }

  // The intervals overlap in more than one point.
  bool interiors_overlap() const {
    return s_lo < t_hi && t_lo < s_hi && s_lo < s_hi && t_lo < t_hi;
  }
};

template <typename Scalar>
Scalar cov(const CovKernel<Scalar>& k, Scalar s, Scalar t) {
  if (s < Scalar(0) || t < Scalar(0))
    throw DomainError("covariance requires nonnegative times");
  const Scalar e = k.two_h();
  return Scalar(0.5) * (abs_pow(t, e) + abs_pow(s, e) - abs_pow(t - s, e));
}

// E[(B_{s_hi}-B_{s_lo})(B_{t_hi}-B_{t_lo})]. The t^{2H} and s^{2H} parts of the
// four R evaluations cancel identically, so only the cross distances remain;
// this avoids cancellation far from the origin.
template <typename Scalar>
Scalar rect_increment(const CovKernel<Scalar>& k, const Rect<Scalar>& r) {
  if (r.s_lo < Scalar(0) || r.t_lo < Scalar(0))
    throw DomainError("covariance requires nonnegative times");
  const Scalar e = k.two_h();
  return Scalar(0.5) * ((abs_pow(r.s_hi - r.t_lo, e) + abs_pow(r.s_lo - r.t_hi, e)) -
                        (abs_pow(r.s_hi - r.t_hi, e) + abs_pow(r.s_lo - r.t_lo, e)));
}

// gamma(k) for the increment sequence B_{(j+1)h} - B_{jh}.
template <typename Scalar>
Scalar fgn_autocovariance(const CovKernel<Scalar>& k, std::int64_t lag, Scalar h) {
  if (lag < 0) throw DomainError("lag must be nonnegative");
  if (!(h > Scalar(0))) throw DomainError("step must be positive");
  const Scalar e = k.two_h();
  const Scalar kk = static_cast<Scalar>(lag);
  const Scalar unit = Scalar(0.5) * (abs_pow(kk + Scalar(1), e) - Scalar(2) * abs_pow(kk, e) +
                                     abs_pow(kk - Scalar(1), e));
  return abs_pow(h, e) * unit;
}

// Gram matrix [R(t_i, t_j)].
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cov_matrix(
    const CovKernel<Scalar>& k, const Eigen::MatrixBase<Derived>& times) {
  const Eigen::Index n = times.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      g(i, j) = cov(k, Scalar(times(i)), Scalar(times(j)));
      g(j, i) = g(i, j);
    }
  }
  return g;
}

// Independent route to rect_increment for essentially disjoint intervals:
//   H (2H-1) \int_a^b \int_c^d |v-u|^{2H-2} dv du,
// by composite 4-point Gauss-Legendre with m panels per axis. The corner
// singularity at a shared endpoint is removed by a power-law grading of
// both axes towards the facing endpoints.
double increment_cov_quadrature(const Kernel& k, const Rect<double>& r, int m);

// Sign of E[(B_b - B_a)(B_d - B_c)] on random ordered quadruples a < b <= c < d
// in [0, 5], every tenth one with b = c. For H < 1/2 all values must be
// negative; for H = 1/2 they must vanish to 1e-12.
struct NegativityReport {
  double hurst = 0.0;
  int samples = 0;
  int negative = 0;
  int shared_endpoint = 0;
  double max_value = 0.0;  // largest (least negative) value seen
  double max_abs = 0.0;
  bool pass = false;
};

NegativityReport check_increment_negativity(double hurst, int samples, std::uint64_t seed);

}  // namespace roughsde
