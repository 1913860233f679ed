#pragma once

// Monte Carlo strong-error experiments for the Euler scheme on coupled
// dyadic grids.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "roughsde/sampler.hpp"
#include "roughsde/sde.hpp"

namespace roughsde {

// The reference the coarse Euler solutions are compared against.
enum class ReferenceKind { fine_euler, exact_linear };

std::string to_string(ReferenceKind r);

struct ExperimentConfig {
  SdeProblem problem;
  double hurst = 0.4;
  std::vector<int> level_exponents{6, 7, 8, 9, 10, 11};  // coarse n = 2^k
  int ref_exponent = 15;                                 // fine n = 2^ref
  int paths = 1000;
  std::uint64_t master_seed = 0;
  SamplerMethod sampler_method = SamplerMethod::circulant;
  int workers = 1;
  ReferenceKind reference = ReferenceKind::fine_euler;
  int bootstrap_resamples = 50;
};

// Throws DomainError on an unusable configuration. Returns warnings for
// usable but unusual ones (H outside (1/3, 1/2)).
std::vector<std::string> validate(const ExperimentConfig& config);

struct ErrorRow {
  int level = 0;
  double h = 0.0;
  double error = 0.0;      // max over coarse grid times of the RMS error
  double std_error = 0.0;  // delta-method MC error at the argmax time
  double argmax_time = 0.0;
};

struct ErrorCurve {
  ExperimentConfig config;
  std::vector<ErrorRow> rows;
  // Bootstrap standard deviation of the fitted slope; NaN when undefined.
  double slope_std_error = 0.0;
  std::vector<std::string> warnings;
  // Timings are informational and not part of any reproducible output.
  double wall_seconds = 0.0;
  std::vector<double> level_seconds;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int rows_used = 0;
};

ErrorCurve strong_error_curve(const ExperimentConfig& config);

// Least squares of log(error) on log(h); zero rows are skipped.
RateFit fit_rate(const ErrorCurve& curve);

void write_error_curve_csv(std::ostream& os, const ErrorCurve& curve);

// ---------------------------------------------------------------------------
// Presets for the two published examples (T = 1, x0 = 1).

double theoretical_rate(int example, double hurst);
double rate_tolerance(int example);
SdeProblem example_problem(int example);

struct ReproduceOptions {
  std::vector<int> level_exponents{6, 7, 8, 9, 10, 11};
  int ref_exponent = 15;
  int paths = 1000;
  std::uint64_t master_seed = 0;
  int workers = 1;
  SamplerMethod sampler_method = SamplerMethod::circulant;
  bool allow_outside_regime = false;
};

ExperimentConfig paper_config(int example, double hurst, const ReproduceOptions& options);

struct Reproduction {
  int example = 0;
  double hurst = 0.0;
  ErrorCurve curve;
  RateFit fit;
  double theory = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

Reproduction reproduce_paper(int example, double hurst, const ReproduceOptions& options);

// ---------------------------------------------------------------------------

struct CrosscheckReport {
  ErrorCurve euler_reference;
  ErrorCurve exact_reference;
  // NaN where a curve has fewer than three nonzero rows.
  double euler_slope = 0.0;
  double exact_slope = 0.0;
  double slope_difference = 0.0;
  double combined_uncertainty = 0.0;
  bool agree = false;
  std::string note;
};

// Runs the experiment twice, once against the fine Euler solution and once
// against the closed-form linear solution, and compares the fitted rates.
CrosscheckReport linear_oracle_crosscheck(const ExperimentConfig& config);

}  // namespace roughsde
