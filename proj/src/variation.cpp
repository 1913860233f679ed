#include "roughsde/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "roughsde/error.hpp"
#include "roughsde/format.hpp"
#include "roughsde/quadrature.hpp"
#include "roughsde/rng.hpp"
#include "roughsde/stats.hpp"

namespace roughsde {

namespace {

bool strictly_increasing(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

std::vector<int> all_lines(Eigen::Index n) {
  std::vector<int> lines(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) lines[static_cast<std::size_t>(i)] = static_cast<int>(i);
  return lines;
}

double cell_increment(const Eigen::MatrixXd& g, int i0, int i1, int j0, int j1) {
  return g(i1, j1) - g(i1, j0) - g(i0, j1) + g(i0, j0);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return least_squares(lx, ly).slope;
}

}  // namespace

GridFunction1D::GridFunction1D(Eigen::VectorXd t, Eigen::VectorXd v)
    : times(std::move(t)), values(std::move(v)) {
  if (times.size() != values.size()) throw DomainError("grid function: length mismatch");
  if (!strictly_increasing(times)) throw DomainError("grid function: times must increase");
}

GridFunction2D::GridFunction2D(Eigen::VectorXd s, Eigen::VectorXd t, Eigen::MatrixXd v)
    : s_times(std::move(s)), t_times(std::move(t)), values(std::move(v)) {
  if (values.rows() != s_times.size() || values.cols() != t_times.size())
    throw DomainError("grid function 2d: shape mismatch");
  if (!strictly_increasing(s_times) || !strictly_increasing(t_times))
    throw DomainError("grid function 2d: axes must increase");
}

GridFunction2D GridFunction2D::tabulate(const Eigen::VectorXd& s, const Eigen::VectorXd& t,
                                        const std::function<double(double, double)>& g) {
  Eigen::MatrixXd v(s.size(), t.size());
  for (Eigen::Index j = 0; j < t.size(); ++j)
    for (Eigen::Index i = 0; i < s.size(); ++i) v(i, j) = g(s[i], t[j]);
  return GridFunction2D(s, t, std::move(v));
}

// ---------------------------------------------------------------------------

VariationEstimate p_variation_1d(const GridFunction1D& f, double p) {
  if (!(p >= 1.0)) throw DomainError("p-variation requires p >= 1");
  const auto n = static_cast<int>(f.size());
  if (n < 2) throw DomainError("p-variation needs at least two grid points");

  // best[j]: largest sum of |increment|^p over partitions of [t_0, t_j].
  std::vector<double> best(n, -std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  best[0] = 0.0;
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double cand = best[i] + std::pow(std::abs(f.values[j] - f.values[i]), p);
      if (cand > best[j]) {
        best[j] = cand;
        prev[j] = i;
      }
    }
  }

  VariationEstimate est;
  est.value = std::pow(best[n - 1], 1.0 / p);
  est.mode = EstimateMode::exact;
  for (int k = n - 1; k >= 0; k = prev[k]) est.s_lines.push_back(k);
  std::reverse(est.s_lines.begin(), est.s_lines.end());
  return est;
}

// ---------------------------------------------------------------------------

double partition_sum_2d(const GridFunction2D& g, const std::vector<int>& s_lines,
                        const std::vector<int>& t_lines, double p) {
  double total = 0.0;
  for (std::size_t b = 0; b + 1 < t_lines.size(); ++b) {
    double column = 0.0;
    for (std::size_t a = 0; a + 1 < s_lines.size(); ++a)
      column += std::pow(std::abs(cell_increment(g.values, s_lines[a], s_lines[a + 1],
                                                 t_lines[b], t_lines[b + 1])),
                         p);
    total += column;
  }
  return total;
}

namespace {

struct BestT {
  double sum;
  std::vector<int> lines;
};

// Optimal t-partition for fixed s-lines.
BestT best_t_partition(const GridFunction2D& g, const std::vector<int>& s_lines, double p) {
  const auto cols = static_cast<int>(g.t_times.size());
  std::vector<double> best(cols, -std::numeric_limits<double>::infinity());
  std::vector<int> prev(cols, -1);
  best[0] = 0.0;
  for (int b = 1; b < cols; ++b) {
    for (int a = 0; a < b; ++a) {
      double column = 0.0;
      for (std::size_t i = 0; i + 1 < s_lines.size(); ++i)
        column += std::pow(
            std::abs(cell_increment(g.values, s_lines[i], s_lines[i + 1], a, b)), p);
      const double cand = best[a] + column;
      if (cand > best[b]) {
        best[b] = cand;
        prev[b] = a;
      }
    }
  }
  BestT out{best[cols - 1], {}};
  for (int k = cols - 1; k >= 0; k = prev[k]) out.lines.push_back(k);
  std::reverse(out.lines.begin(), out.lines.end());
  return out;
}

VariationEstimate brute_2d(const GridFunction2D& g, double p) {
  const auto rows = static_cast<int>(g.s_times.size());
  const int interior = rows - 2;
  VariationEstimate est;
  est.mode = EstimateMode::exact;
  double best = -1.0;
  for (std::uint32_t mask = 0; mask < (1u << interior); ++mask) {
    std::vector<int> s_lines{0};
    for (int k = 0; k < interior; ++k)
      if (mask & (1u << k)) s_lines.push_back(k + 1);
    s_lines.push_back(rows - 1);
    BestT cand = best_t_partition(g, s_lines, p);
    if (cand.sum > best) {
      best = cand.sum;
      est.s_lines = std::move(s_lines);
      est.t_lines = std::move(cand.lines);
    }
  }
  est.value = std::pow(best, 1.0 / p);
  return est;
}

VariationEstimate greedy_2d(const GridFunction2D& g, double p) {
  std::vector<int> s_lines = all_lines(g.s_times.size());
  std::vector<int> t_lines = all_lines(g.t_times.size());
  double current = partition_sum_2d(g, s_lines, t_lines, p);
  for (;;) {
    double best = current;
    int best_axis = -1;
    std::size_t best_pos = 0;
    for (int axis = 0; axis < 2; ++axis) {
      std::vector<int>& lines = axis == 0 ? s_lines : t_lines;
      for (std::size_t pos = 1; pos + 1 < lines.size(); ++pos) {
        std::vector<int> trial = lines;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
        const double sum = axis == 0 ? partition_sum_2d(g, trial, t_lines, p)
                                     : partition_sum_2d(g, s_lines, trial, p);
        if (sum > best) {
          best = sum;
          best_axis = axis;
          best_pos = pos;
        }
      }
    }
    if (best_axis < 0) break;
    std::vector<int>& lines = best_axis == 0 ? s_lines : t_lines;
    lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(best_pos));
    current = best;
  }
  VariationEstimate est;
  est.value = std::pow(current, 1.0 / p);
  est.mode = EstimateMode::lower_bound;
  est.s_lines = std::move(s_lines);
  est.t_lines = std::move(t_lines);
  return est;
}

}  // namespace

VariationEstimate variation_2d(const GridFunction2D& g, double p, Variation2DMode mode) {
  if (!(p >= 1.0)) throw DomainError("2d variation requires p >= 1");
  if (g.s_times.size() < 2 || g.t_times.size() < 2)
    throw DomainError("2d variation needs at least two lines per axis");
  if (mode == Variation2DMode::greedy) return greedy_2d(g, p);

  const auto interior = (g.s_times.size() - 2) + (g.t_times.size() - 2);
  if (interior > kBruteInteriorCap)
    throw DomainError("brute 2d variation limited to " + std::to_string(kBruteInteriorCap) +
                      " interior lines; use greedy mode");
  return brute_2d(g, p);
}

// ---------------------------------------------------------------------------

double young_integral_2d(const Integrand2D& f, const Kernel& kernel, const Rect<double>& domain,
                         int refinement) {
  if (refinement < 1) throw DomainError("refinement must be positive");
  const int n = refinement;
  const double ds = (domain.s_hi - domain.s_lo) / n;
  const double dt = (domain.t_hi - domain.t_lo) / n;
  auto s_node = [&](int i) { return i == n ? domain.s_hi : domain.s_lo + i * ds; };
  auto t_node = [&](int j) { return j == n ? domain.t_hi : domain.t_lo + j * dt; };

  Eigen::MatrixXd r(n + 1, n + 1);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) r(i, j) = cov(kernel, s_node(i), t_node(j));

  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    double column = 0.0;
    for (int i = 0; i < n; ++i)
      column += f(s_node(i), t_node(j)) * cell_increment(r, i, i + 1, j, j + 1);
    total += column;
  }
  return total;
}

Integrand2D grid_integrand(GridFunction2D table) {
  return [table = std::move(table)](double s, double t) {
    auto locate = [](const Eigen::VectorXd& axis, double x) {
      const double scale = std::max(1.0, std::abs(axis[axis.size() - 1]));
      const double* first = axis.data();
      const double* last = first + axis.size();
      const double* it = std::lower_bound(first, last, x - 1e-9 * scale);
      if (it == last || std::abs(*it - x) > 1e-9 * scale)
        throw DomainError("integrand queried off its table at " + format_short(x));
      return static_cast<Eigen::Index>(it - first);
    };
    return table.values(locate(table.s_times, s), locate(table.t_times, t));
  };
}

YoungResult young_integral_converge(const Integrand2D& f, const Kernel& kernel,
                                    const Rect<double>& domain, const YoungOptions& options) {
  YoungResult res;
  int n = options.initial_refinement;
  res.refinements.push_back(n);
  res.values.push_back(young_integral_2d(f, kernel, domain, n));
  while (2 * n <= options.max_refinement) {
    n *= 2;
    const double v = young_integral_2d(f, kernel, domain, n);
    const double diff = std::abs(v - res.values.back());
    res.refinements.push_back(n);
    res.values.push_back(v);
    res.cauchy_differences.push_back(diff);
    if (diff < options.tolerance) {
      res.value = v;
      res.refinement = n;
      return res;
    }
  }
  std::ostringstream msg;
  msg << "young integral did not converge to " << options.tolerance << " by refinement "
      << n;
  throw ConvergenceError(msg.str(), res.cauchy_differences);
}

YoungDiagnostic check_young(double hurst, int rectangles, std::uint64_t seed) {
  if (rectangles < 1) throw DomainError("need at least one rectangle");
  const Kernel kernel(hurst);
  const RngStream rng{seed, 0};
  YoungDiagnostic d;
  d.hurst = hurst;
  d.rectangles = rectangles;
  for (int i = 0; i < rectangles; ++i) {
    const auto u = rng.uniform_pair(2 * static_cast<std::uint64_t>(i));
    const auto w = rng.uniform_pair(2 * static_cast<std::uint64_t>(i) + 1);
    const Rect<double> r(3 * std::min(u[0], u[1]), 3 * std::max(u[0], u[1]),
                         3 * std::min(w[0], w[1]), 3 * std::max(w[0], w[1]));
    const double target = rect_increment(kernel, r);
    for (int n : {1, 3, 16, 50}) {
      const double v = young_integral_2d([](double, double) { return 1.0; }, kernel, r, n);
      d.worst_constant_error = std::max(d.worst_constant_error, std::abs(v - target));
    }
  }
  d.constant_ok = d.worst_constant_error <= 1e-13;

  const Rect<double> unit(0.0, 1.0, 0.0, 1.0);
  const Integrand2D bilinear = [](double s, double t) { return s * t; };
  d.min_ratio = std::numeric_limits<double>::infinity();
  for (int n = 4; n <= 1024; n *= 2) {
    d.refinements.push_back(n);
    d.bilinear_values.push_back(young_integral_2d(bilinear, kernel, unit, n));
    const auto m = d.bilinear_values.size();
    if (m >= 2) d.cauchy_differences.push_back(std::abs(d.bilinear_values[m - 1] - d.bilinear_values[m - 2]));
    const auto c = d.cauchy_differences.size();
    if (c >= 2) d.min_ratio = std::min(d.min_ratio, d.cauchy_differences[c - 2] / d.cauchy_differences[c - 1]);
  }
  d.closed_form = 1.0 / (2.0 * hurst + 2.0);
  d.bilinear_ok = d.min_ratio >= 1.5;
  d.pass = d.constant_ok && d.bilinear_ok;
  return d;
}

// ---------------------------------------------------------------------------

ScalingReport check_lemma_rr_scaling(double hurst, const std::vector<double>& lengths,
                                     int grid_points) {
  if (!(hurst > 0.0 && hurst <= 0.5)) throw DomainError("lemma-rr check requires H in (0, 1/2]");
  if (lengths.size() < 3) throw DomainError("need at least three interval lengths to fit");
  if (grid_points < 2) throw DomainError("need at least two grid points per axis");
  const Kernel kernel(hurst);
  const double p = 1.0 / (2.0 * hurst);

  ScalingReport rep;
  rep.check = "lemma-rr";
  rep.hurst = hurst;
  rep.target_slope = 2.0 * hurst;
  rep.tolerance = 0.1;
  for (double len : lengths) {
    if (!(len > 0.0)) throw DomainError("interval lengths must be positive");
    const Eigen::VectorXd axis = Eigen::VectorXd::LinSpaced(grid_points, 0.0, len);
    const auto g = GridFunction2D::tabulate(
        axis, axis, [&](double s, double t) { return cov(kernel, s, t); });
    rep.grid.push_back(len);
    rep.estimates.push_back(variation_2d(g, p, Variation2DMode::greedy).value);
  }
  rep.fitted_slope = log_log_slope(rep.grid, rep.estimates);
  rep.pass = rep.fitted_slope >= rep.target_slope - rep.tolerance;
  rep.note = "greedy lower bound of the V^{1/2H} norm on a uniform grid; exponent only";
  return rep;
}

Eq31Integrals eq31_integrals(double hurst, double horizon, int steps, int m) {
  if (!(hurst > 0.0 && hurst <= 0.5)) throw DomainError("requires H in (0, 1/2]");
  if (steps < 1 || m < 1 || !(horizon > 0.0)) throw DomainError("invalid grid or rule size");
  const Kernel kernel(hurst);
  const GaussRule rule = gauss_legendre(m);
  const double h = horizon / steps;
  std::vector<double> x(m), w(m);
  for (int a = 0; a < m; ++a) {
    x[a] = 0.5 * h * (rule.nodes[a] + 1.0);
    w[a] = 0.5 * h * rule.weights[a];
  }
  // By stationarity of increments the cell-pair integral depends on the lag only.
  auto lag_integral = [&](int lag) {
    const double base = lag * h;
    double total = 0.0;
    for (int b = 0; b < m; ++b) {
      double row = 0.0;
      for (int a = 0; a < m; ++a)
        row += w[a] * std::abs(rect_increment(kernel, Rect<double>(base, base + x[b], 0.0, x[a])));
      total += w[b] * row;
    }
    return total;
  };
  Eq31Integrals out;
  out.diagonal = steps * lag_integral(0);
  double off = 0.0;
  for (int lag = 1; lag < steps; ++lag) off += 2.0 * (steps - lag) * lag_integral(lag);
  out.off_diagonal = off;
  return out;
}

ScalingReport check_eq31_scaling(double hurst, double horizon, const std::vector<int>& steps,
                                 int m) {
  const Kernel kernel(hurst);
  kernel.require_rough_regime();
  if (steps.size() < 3) throw DomainError("need at least three grids to fit");
  ScalingReport rep;
  rep.check = "eq31";
  rep.hurst = hurst;
  rep.target_slope = 2.0 * hurst + 1.0;
  rep.tolerance = 0.15;
  for (int n : steps) {
    const Eq31Integrals parts = eq31_integrals(hurst, horizon, n, m);
    rep.grid.push_back(horizon / n);
    rep.diagonal.push_back(parts.diagonal);
    rep.off_diagonal.push_back(parts.off_diagonal);
    rep.estimates.push_back(parts.diagonal + parts.off_diagonal);
  }
  rep.fitted_slope = log_log_slope(rep.grid, rep.estimates);
  rep.pass = rep.fitted_slope >= rep.target_slope - rep.tolerance;
  rep.note = "integral of |E[(B_s-B_[s])(B_t-B_[t])]|, split into same-cell and other-cell parts";
  return rep;
}

Eq32Integrals eq32_integrals(double hurst, double horizon, int steps, int m) {
  if (!(hurst > 0.0 && hurst <= 0.5)) throw DomainError("requires H in (0, 1/2]");
  if (steps < 1 || m < 1 || !(horizon > 0.0)) throw DomainError("invalid grid or rule size");
  const Kernel kernel(hurst);
  const GaussRule rule = gauss_legendre(m);
  const double h = horizon / steps;
  Eq32Integrals out;
  for (int i = 0; i < steps; ++i) {
    const double left = i * h;
    double cross = 0.0, diag = 0.0;
    for (int a = 0; a < m; ++a) {
      const double x = 0.5 * h * (rule.nodes[a] + 1.0);
      const double w = 0.5 * h * rule.weights[a];
      cross += w * std::abs(rect_increment(kernel, Rect<double>(left, left + x, 0.0, left)));
      diag += w * rect_increment(kernel, Rect<double>(left, left + x, left, left + x));
    }
    out.cross += cross;
    out.diagonal += diag;
  }
  return out;
}

ScalingReport check_eq32_scaling(double hurst, double horizon, const std::vector<int>& steps,
                                 int m) {
  if (!(hurst > 1.0 / 3.0 && hurst <= 0.5)) throw DomainError("eq32 check requires H in (1/3, 1/2]");
  if (steps.size() < 3) throw DomainError("need at least three grids to fit");
  ScalingReport rep;
  rep.check = "eq32";
  rep.hurst = hurst;
  rep.target_slope = 2.0 * hurst;
  rep.tolerance = 0.15;
  double largest = 0.0;
  for (int n : steps) {
    const Eq32Integrals parts = eq32_integrals(hurst, horizon, n, m);
    rep.grid.push_back(horizon / n);
    rep.estimates.push_back(parts.cross);
    rep.diagonal.push_back(parts.diagonal);
    largest = std::max(largest, parts.cross);
  }
  // Independent increments make the cross term vanish up to rounding.
  if (hurst == 0.5 || largest <= 1e-14 * std::pow(horizon, 2.0 * hurst + 1.0)) {
    rep.fitted_slope = std::numeric_limits<double>::quiet_NaN();
    rep.pass = true;
    rep.note = "identically zero integrand; slope check skipped";
    return rep;
  }
  rep.fitted_slope = log_log_slope(rep.grid, rep.estimates);
  rep.pass = rep.fitted_slope >= rep.target_slope - rep.tolerance;
  rep.note = "integral of |E[(B_t-B_[t])(B_[t]-B_0)]|";
  return rep;
}

}  // namespace roughsde
