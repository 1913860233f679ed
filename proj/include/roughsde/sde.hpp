#pragma once

// dX_t = a(X_t) dt + sigma dB_t with B an fBm, and its Euler scheme
//   Y_t = Y_{t_k} + a(Y_{t_k}) (t - t_k) + sigma (B_t - B_{t_k}).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughsde/sampler.hpp"

namespace roughsde {

struct DriftSpec {
  using Fn = std::function<double(double)>;

  std::string name;
  Fn eval, d1, d2, d3;
  double lipschitz_bound = 0.0;
  // Set for a(x) = A x.
  std::optional<double> linear_coefficient;
};

DriftSpec drift_example1();
DriftSpec drift_linear(double coefficient);
DriftSpec drift_zero();

struct SdeProblem {
  DriftSpec drift;
  double sigma = 1.0;
  double x0 = 0.0;
  double horizon = 1.0;
};

struct SolutionPath {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
  std::string drift_name;
  double hurst = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  SamplerMethod method = SamplerMethod::cholesky;
};

inline constexpr double kStateOverflow = 1e100;

// Euler scheme on the grid of `driving`. The state is carried as
// Y_k = x0 + sigma B_k + D_k with D_{k+1} = D_k + a(Y_k) h, which is the
// same recursion with the noise telescoped, so any two grids that share
// B values agree on them exactly when the drift vanishes.
SolutionPath euler_path(const SdeProblem& problem, const FbmPath& driving);
// Grid values only.
Eigen::VectorXd euler_values(const SdeProblem& problem, const FbmPath& driving);

// Continuous interpolation of a coarse Euler solution evaluated on every
// point of the finer coupled grid `fine`.
SolutionPath euler_interpolate(const SdeProblem& problem, const SolutionPath& coarse,
                               const FbmPath& fine);

// X_t = e^{At} x0 + sigma B_t + sigma A \int_0^t e^{A(t-s)} B_s ds, with the
// integral by the trapezoidal rule on the fine grid. eval_times must be
// fine grid points.
SolutionPath exact_linear_solution(double coefficient, double sigma, double x0,
                                   const FbmPath& fine, const std::vector<double>& eval_times);

struct MomentRow {
  int steps = 0;
  double sup_second = 0.0, sup_second_se = 0.0;
  double sup_fourth = 0.0, sup_fourth_se = 0.0;
};

struct MomentReport {
  std::vector<MomentRow> rows;
  bool stable = true;
  std::string note;
};

// sup_t E|Y_t|^p for p in {2,4} at the given step counts on coupled paths.
MomentReport moment_sanity(const SdeProblem& problem, double hurst,
                           const std::vector<int>& steps, int paths, std::uint64_t seed,
                           SamplerMethod method);

// Same CSV layout as fbm paths, header tagged kind=solution drift=<name>.
void write_solution_csv(std::ostream& os, const SolutionPath& path);

}  // namespace roughsde
