#include "roughsde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "roughsde/format.hpp"
#include "roughsde/stats.hpp"

namespace roughsde {

std::string to_string(ReferenceKind r) {
  return r == ReferenceKind::fine_euler ? "fine-euler" : "exact-linear";
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  if (!(c.hurst > 0.0 && c.hurst < 1.0)) throw DomainError("hurst parameter must lie in (0,1)");
  if (c.level_exponents.empty()) throw DomainError("at least one coarse level is required");
  if (!std::is_sorted(c.level_exponents.begin(), c.level_exponents.end()) ||
      std::adjacent_find(c.level_exponents.begin(), c.level_exponents.end()) !=
          c.level_exponents.end())
    throw DomainError("level exponents must be strictly increasing");
  if (c.level_exponents.front() < 0) throw DomainError("level exponents must be nonnegative");
  if (c.ref_exponent <= c.level_exponents.back())
    throw DomainError("reference exponent must exceed every level exponent");
  if (c.ref_exponent > 24) throw DomainError("reference exponent above 24 is not supported");
  if (c.paths < 2) throw DomainError("need at least two Monte Carlo paths");
  if (c.workers < 1) throw DomainError("need at least one worker");
  if (!(c.problem.horizon > 0.0)) throw DomainError("horizon must be positive");
  if (c.reference == ReferenceKind::exact_linear && !c.problem.drift.linear_coefficient)
    throw DomainError("the exact reference is only available for linear drift");
  std::vector<std::string> warnings;
  if (!(c.hurst > 1.0 / 3.0 && c.hurst < 0.5))
    warnings.push_back("hurst " + format_short(c.hurst) +
                       " lies outside (1/3, 1/2) where the convergence rates are established");
  return warnings;
}

namespace {

struct LevelLayout {
  std::vector<int> offset;  // start of each level in the per-path buffer
  std::vector<int> points;  // 2^k + 1 grid times per level
  int total = 0;
};

LevelLayout make_layout(const std::vector<int>& exponents) {
  LevelLayout lay;
  for (int k : exponents) {
    lay.offset.push_back(lay.total);
    lay.points.push_back((1 << k) + 1);
    lay.total += (1 << k) + 1;
  }
  return lay;
}

// Squared pathwise errors (X - Y)^2 at every coarse grid time of every
// level, for one Monte Carlo path.
void path_errors(const ExperimentConfig& c, const FbmSampler& sampler, const LevelLayout& lay,
                 std::uint64_t path_index, double* out, std::vector<double>& level_seconds) {
  using clock = std::chrono::steady_clock;
  const FbmPath fine = sampler.sample(RngStream{c.master_seed, path_index});
  const int top = c.level_exponents.back();
  const int top_stride = 1 << (c.ref_exponent - top);

  // Reference on the finest coarse grid; every coarser grid is a subset.
  Eigen::VectorXd reference((1 << top) + 1);
  if (c.reference == ReferenceKind::fine_euler) {
    const Eigen::VectorXd x = euler_values(c.problem, fine);
    for (Eigen::Index j = 0; j < reference.size(); ++j) reference[j] = x[j * top_stride];
  } else {
    std::vector<double> times(static_cast<std::size_t>(reference.size()));
    for (std::size_t j = 0; j < times.size(); ++j)
      times[j] = fine.time(static_cast<int>(j) * top_stride);
    reference = exact_linear_solution(*c.problem.drift.linear_coefficient, c.problem.sigma,
                                      c.problem.x0, fine, times)
                    .values;
  }

  for (std::size_t l = 0; l < c.level_exponents.size(); ++l) {
    const auto start = clock::now();
    const int k = c.level_exponents[l];
    const FbmPath coarse = subsample(fine, 1 << (c.ref_exponent - k));
    const Eigen::VectorXd y = euler_values(c.problem, coarse);
    const int stride = 1 << (top - k);
    double* dst = out + lay.offset[l];
    for (int j = 0; j < lay.points[l]; ++j) {
      const double d = reference[j * stride] - y[j];
      dst[j] = d * d;
    }
    level_seconds[l] += std::chrono::duration<double>(clock::now() - start).count();
  }
}

// Per level: index of the time maximising the mean squared error and the mean there.
struct LevelSup {
  int argmax = 0;
  double mean = 0.0;
};

std::vector<LevelSup> sup_over_time(const std::vector<double>& buffer, const LevelLayout& lay,
                                    const std::vector<std::size_t>& paths) {
  std::vector<LevelSup> out(lay.points.size());
  std::vector<double> sums;
  for (std::size_t l = 0; l < lay.points.size(); ++l) {
    sums.assign(static_cast<std::size_t>(lay.points[l]), 0.0);
    for (std::size_t p : paths) {
      const double* row = buffer.data() + p * lay.total + lay.offset[l];
      for (int j = 0; j < lay.points[l]; ++j) sums[j] += row[j];
    }
    LevelSup best;
    for (int j = 0; j < lay.points[l]; ++j) {
      if (sums[j] > best.mean) {
        best.mean = sums[j];
        best.argmax = j;
      }
    }
    best.mean /= static_cast<double>(paths.size());
    out[l] = best;
  }
  return out;
}

std::vector<ErrorRow> rows_from_sup(const ExperimentConfig& c, const std::vector<LevelSup>& sup) {
  std::vector<ErrorRow> rows;
  for (std::size_t l = 0; l < sup.size(); ++l) {
    const int k = c.level_exponents[l];
    ErrorRow r;
    r.level = k;
    r.h = c.problem.horizon / (1 << k);
    r.error = std::sqrt(sup[l].mean);
    r.argmax_time = sup[l].argmax * r.h;
    rows.push_back(r);
  }
  return rows;
}

std::optional<double> slope_of(const std::vector<ErrorRow>& rows) {
  std::vector<double> lx, ly;
  for (const auto& r : rows) {
    if (r.error > 0.0) {
      lx.push_back(std::log(r.h));
      ly.push_back(std::log(r.error));
    }
  }
  if (lx.size() < 3) return std::nullopt;
  return least_squares(lx, ly).slope;
}

}  // namespace

ErrorCurve strong_error_curve(const ExperimentConfig& c) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  ErrorCurve curve;
  curve.config = c;
  curve.warnings = validate(c);
  for (const auto& w : curve.warnings) std::clog << "warning: " << w << '\n';

  const int fine_steps = 1 << c.ref_exponent;
  const FbmSampler sampler(c.hurst, fine_steps, c.problem.horizon, c.sampler_method);
  const LevelLayout lay = make_layout(c.level_exponents);
  const auto paths = static_cast<std::size_t>(c.paths);
  std::vector<double> buffer(paths * static_cast<std::size_t>(lay.total));

  // Each path writes only its own slice; merge order is fixed by path index.
  std::atomic<std::size_t> next{0};
  std::mutex fail_mutex;
  std::size_t failed_path = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  std::vector<std::vector<double>> seconds(
      static_cast<std::size_t>(c.workers), std::vector<double>(c.level_exponents.size(), 0.0));

  auto work = [&](std::size_t worker) {
    for (std::size_t p = next++; p < paths; p = next++) {
      try {
        path_errors(c, sampler, lay, p, buffer.data() + p * lay.total, seconds[worker]);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        if (p < failed_path) {
          failed_path = p;
          failure = std::make_exception_ptr(
              NumericalError("path " + std::to_string(p) + ": " + e.what()));
        }
      }
    }
  };
  if (c.workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < c.workers; ++w) pool.emplace_back(work, static_cast<std::size_t>(w));
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::size_t> all(paths);
  for (std::size_t p = 0; p < paths; ++p) all[p] = p;
  const std::vector<LevelSup> sup = sup_over_time(buffer, lay, all);
  curve.rows = rows_from_sup(c, sup);

  for (std::size_t l = 0; l < curve.rows.size(); ++l) {
    auto& row = curve.rows[l];
    if (row.error == 0.0) continue;
    double sq = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
      const double d = buffer[p * lay.total + lay.offset[l] + sup[l].argmax] - sup[l].mean;
      sq += d * d;
    }
    const double mean_se = std::sqrt(sq / (c.paths - 1) / c.paths);
    row.std_error = mean_se / (2.0 * row.error);
  }

  // Bootstrap over paths for the slope uncertainty.
  curve.slope_std_error = std::numeric_limits<double>::quiet_NaN();
  if (c.bootstrap_resamples > 1 && slope_of(curve.rows)) {
    const RngStream base{c.master_seed ^ 0xB0075EEDB0075EEDull, 0};
    std::vector<double> slopes;
    std::vector<std::size_t> pick(paths);
    for (int r = 0; r < c.bootstrap_resamples; ++r) {
      const RngStream rs{base.master_seed, static_cast<std::uint64_t>(r)};
      for (std::size_t p = 0; p < paths; ++p) {
        const double u = rs.uniform_pair(p / 2)[p % 2];
        pick[p] = std::min(paths - 1, static_cast<std::size_t>(u * static_cast<double>(paths)));
      }
      if (auto s = slope_of(rows_from_sup(c, sup_over_time(buffer, lay, pick)))) slopes.push_back(*s);
    }
    if (slopes.size() > 1) {
      double mean = 0.0;
      for (double s : slopes) mean += s;
      mean /= static_cast<double>(slopes.size());
      double var = 0.0;
      for (double s : slopes) var += (s - mean) * (s - mean);
      curve.slope_std_error = std::sqrt(var / static_cast<double>(slopes.size() - 1));
    }
  }

  curve.level_seconds.assign(c.level_exponents.size(), 0.0);
  for (const auto& s : seconds)
    for (std::size_t l = 0; l < s.size(); ++l) curve.level_seconds[l] += s[l];
  curve.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return curve;
}

RateFit fit_rate(const ErrorCurve& curve) {
  std::vector<double> lx, ly;
  int skipped = 0;
  for (const auto& r : curve.rows) {
    if (r.error > 0.0) {
      lx.push_back(std::log(r.h));
      ly.push_back(std::log(r.error));
    } else {
      ++skipped;
    }
  }
  if (skipped > 0) std::clog << "warning: excluded " << skipped << " zero-error rows from the fit\n";
  if (lx.size() < 3) throw DomainError("rate fit needs at least three nonzero error rows");
  const LinearFit f = least_squares(lx, ly);
  return RateFit{f.slope, f.intercept, f.r_squared, static_cast<int>(lx.size())};
}

void write_error_curve_csv(std::ostream& os, const ErrorCurve& curve) {
  os << "level,h,error,stderr\n";
  for (const auto& r : curve.rows)
    os << r.level << ',' << format_full(r.h) << ',' << format_full(r.error) << ','
       << format_full(r.std_error) << '\n';
}

// ---------------------------------------------------------------------------

double theoretical_rate(int example, double hurst) {
  if (example == 1) return 2.0 * hurst;
  if (example == 2) return hurst + 0.5;
  throw DomainError("example must be 1 or 2");
}

double rate_tolerance(int example) {
  if (example == 1) return 0.15;
  if (example == 2) return 0.10;
  throw DomainError("example must be 1 or 2");
}

SdeProblem example_problem(int example) {
  if (example == 1) return SdeProblem{drift_example1(), 1.0, 1.0, 1.0};
  if (example == 2) return SdeProblem{drift_linear(2.0), 9.0, 1.0, 1.0};
  throw DomainError("example must be 1 or 2");
}

ExperimentConfig paper_config(int example, double hurst, const ReproduceOptions& o) {
  if (!o.allow_outside_regime && !(hurst > 1.0 / 3.0 && hurst < 0.5))
    throw DomainError("hurst " + format_short(hurst) +
                      " is outside the preset range (1/3, 1/2); pass an explicit override");
  ExperimentConfig c;
  c.problem = example_problem(example);
  c.hurst = hurst;
  c.level_exponents = o.level_exponents;
  c.ref_exponent = o.ref_exponent;
  c.paths = o.paths;
  c.master_seed = o.master_seed;
  c.sampler_method = o.sampler_method;
  c.workers = o.workers;
  return c;
}

Reproduction reproduce_paper(int example, double hurst, const ReproduceOptions& o) {
  Reproduction r;
  r.example = example;
  r.hurst = hurst;
  r.theory = theoretical_rate(example, hurst);
  r.tolerance = rate_tolerance(example);
  r.curve = strong_error_curve(paper_config(example, hurst, o));
  r.fit = fit_rate(r.curve);
  r.pass = std::abs(r.fit.slope - r.theory) <= r.tolerance;
  return r;
}

// ---------------------------------------------------------------------------

CrosscheckReport linear_oracle_crosscheck(const ExperimentConfig& config) {
  if (!config.problem.drift.linear_coefficient)
    throw DomainError("the linear oracle cross-check requires a linear drift");
  CrosscheckReport rep;
  ExperimentConfig c = config;
  c.reference = ReferenceKind::fine_euler;
  rep.euler_reference = strong_error_curve(c);
  c.reference = ReferenceKind::exact_linear;
  rep.exact_reference = strong_error_curve(c);

  const auto nan = std::numeric_limits<double>::quiet_NaN();
  const auto s1 = slope_of(rep.euler_reference.rows);
  const auto s2 = slope_of(rep.exact_reference.rows);
  rep.euler_slope = s1.value_or(nan);
  rep.exact_slope = s2.value_or(nan);
  if (s1 && s2) {
    rep.slope_difference = *s1 - *s2;
    const double u1 = rep.euler_reference.slope_std_error;
    const double u2 = rep.exact_reference.slope_std_error;
    rep.combined_uncertainty = std::sqrt(u1 * u1 + u2 * u2);
    rep.agree = std::abs(rep.slope_difference) <= 0.1;
    if (!rep.agree) rep.note = "slopes differ by more than 0.1";
  } else {
    bool identical = rep.euler_reference.rows.size() == rep.exact_reference.rows.size();
    for (std::size_t i = 0; identical && i < rep.euler_reference.rows.size(); ++i)
      identical = rep.euler_reference.rows[i].error == rep.exact_reference.rows[i].error;
    rep.slope_difference = nan;
    rep.combined_uncertainty = nan;
    rep.agree = identical;
    rep.note = identical ? "too few nonzero rows to fit; error curves identical"
                         : "too few nonzero rows to fit and curves differ";
  }
  return rep;
}

}  // namespace roughsde
