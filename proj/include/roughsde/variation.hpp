#pragma once

// Discrete p-variation, 2D variation over grid-like partitions, 2D Young
// Riemann sums against the fBm covariance, and exponent checks for the
// covariance bounds used in the Euler error analysis.
//
// All suprema are over sub-partitions of the supplied grid and are therefore
// lower bounds of the continuum norms.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughsde/kernel.hpp"

namespace roughsde {

struct GridFunction1D {
  Eigen::VectorXd times;
  Eigen::VectorXd values;

  GridFunction1D(Eigen::VectorXd t, Eigen::VectorXd v);
  Eigen::Index size() const { return times.size(); }
};

struct GridFunction2D {
  Eigen::VectorXd s_times;
  Eigen::VectorXd t_times;
  Eigen::MatrixXd values;  // values(i, j) = g(s_i, t_j)

  GridFunction2D(Eigen::VectorXd s, Eigen::VectorXd t, Eigen::MatrixXd v);

  // Tabulates g on the product grid.
  static GridFunction2D tabulate(const Eigen::VectorXd& s, const Eigen::VectorXd& t,
                                 const std::function<double(double, double)>& g);
};

enum class EstimateMode { exact, lower_bound };

struct VariationEstimate {
  double value = 0.0;
  EstimateMode mode = EstimateMode::exact;
  // Grid indices of the partition realising `value`.
  std::vector<int> s_lines;
  std::vector<int> t_lines;
};

// Exact supremum over sub-partitions of the grid, O(n^2) dynamic program.
VariationEstimate p_variation_1d(const GridFunction1D& f, double p);

enum class Variation2DMode { brute, greedy };

inline constexpr int kBruteInteriorCap = 20;

// Sum over cells of |g(rect)|^p for the partition given by the line indices.
double partition_sum_2d(const GridFunction2D& g, const std::vector<int>& s_lines,
                        const std::vector<int>& t_lines, double p);

// brute: every subset of interior s-lines, with the optimal t-partition for
// each found by dynamic programming; exact on the grid. greedy: starts from
// the full grid and deletes single lines while that increases the sum.
VariationEstimate variation_2d(const GridFunction2D& g, double p, Variation2DMode mode);

// Riemann sum  sum_{i,j} f(u_i, v_j) R([u_i,u_{i+1}] x [v_j,v_{j+1}])  on a
// uniform refinement x refinement partition of `domain`.
using Integrand2D = std::function<double(double, double)>;
double young_integral_2d(const Integrand2D& f, const Kernel& kernel, const Rect<double>& domain,
                         int refinement);

// Integrand backed by a table; queried points must be grid nodes.
Integrand2D grid_integrand(GridFunction2D table);

struct YoungOptions {
  int initial_refinement = 4;
  int max_refinement = 1024;
  double tolerance = 1e-6;
};

struct YoungResult {
  double value = 0.0;
  int refinement = 0;
  std::vector<int> refinements;
  std::vector<double> values;
  std::vector<double> cauchy_differences;
};

// Doubles the refinement until successive sums differ by less than the
// tolerance. Throws ConvergenceError with the difference trace at the cap.
YoungResult young_integral_converge(const Integrand2D& f, const Kernel& kernel,
                                    const Rect<double>& domain, const YoungOptions& options);

// Fixed-H Young integral checks: f = 1 reproduces rect_increment on random
// rectangles in [0,3]^2 at several refinements, and f(s,t) = s t on [0,1]^2
// converges with Cauchy differences shrinking by at least 1.5 per doubling.
struct YoungDiagnostic {
  double hurst = 0.0;
  int rectangles = 0;
  double worst_constant_error = 0.0;
  std::vector<int> refinements;
  std::vector<double> bilinear_values;
  std::vector<double> cauchy_differences;
  double min_ratio = 0.0;
  double closed_form = 0.0;  // 1 / (2H + 2)
  bool constant_ok = false;
  bool bilinear_ok = false;
  bool pass = false;
};

YoungDiagnostic check_young(double hurst, int rectangles, std::uint64_t seed);

struct ScalingReport {
  std::string check;
  double hurst = 0.0;
  std::vector<double> grid;       // interval lengths or step sizes
  std::vector<double> estimates;  // quantity whose log-log slope is fitted
  // Optional split of the estimate.
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;
  double fitted_slope = 0.0;
  double target_slope = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

// Greedy V^{1/2H} lower bound of R on [0, l]^2 for each l.
ScalingReport check_lemma_rr_scaling(double hurst, const std::vector<double>& lengths,
                                     int grid_points = 17);

// Diagonal and off-diagonal parts of
//   \int_0^T \int_0^T |E[(B_s - B_{[s]})(B_t - B_{[t]})]| ds dt
// by m-point Gauss-Legendre per cell and axis.
struct Eq31Integrals {
  double diagonal = 0.0;
  double off_diagonal = 0.0;
};
Eq31Integrals eq31_integrals(double hurst, double horizon, int steps, int m);

ScalingReport check_eq31_scaling(double hurst, double horizon, const std::vector<int>& steps,
                                 int m = 8);

// cross = \int_0^T |E[(B_t - B_{[t]})(B_{[t]} - B_0)]| dt and
// diagonal = \int_0^T E[(B_t - B_{[t]})^2] dt.
struct Eq32Integrals {
  double cross = 0.0;
  double diagonal = 0.0;
};
Eq32Integrals eq32_integrals(double hurst, double horizon, int steps, int m);

ScalingReport check_eq32_scaling(double hurst, double horizon, const std::vector<int>& steps,
                                 int m = 8);

}  // namespace roughsde
