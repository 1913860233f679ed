#include "roughsde/report.hpp"

#include "roughsde/format.hpp"

#ifndef ROUGHSDE_VERSION
#define ROUGHSDE_VERSION "unknown"
#endif

namespace roughsde {

const char* version_string() { return "roughsde " ROUGHSDE_VERSION; }

nlohmann::json to_json(const ScalingReport& r) {
  return {{"check", r.check},
          {"H", r.hurst},
          {"grid", r.grid},
          {"estimates", r.estimates},
          {"diagonal", r.diagonal},
          {"off_diagonal", r.off_diagonal},
          {"fitted_slope", r.fitted_slope},
          {"target_slope", r.target_slope},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"note", r.note}};
}

nlohmann::json to_json(const NegativityReport& r) {
  return {{"check", "cov-neg"},
          {"H", r.hurst},
          {"samples", r.samples},
          {"negative", r.negative},
          {"shared_endpoint", r.shared_endpoint},
          {"max_value", r.max_value},
          {"max_abs", r.max_abs},
          {"pass", r.pass}};
}

nlohmann::json to_json(const YoungDiagnostic& d) {
  return {{"check", "young"},
          {"H", d.hurst},
          {"rectangles", d.rectangles},
          {"worst_constant_error", d.worst_constant_error},
          {"refinements", d.refinements},
          {"bilinear_values", d.bilinear_values},
          {"cauchy_differences", d.cauchy_differences},
          {"min_ratio", d.min_ratio},
          {"closed_form", d.closed_form},
          {"constant_ok", d.constant_ok},
          {"bilinear_ok", d.bilinear_ok},
          {"pass", d.pass}};
}

nlohmann::json to_json(const SelfTestReport& r) {
  return {{"H", r.hurst},
          {"n", r.steps},
          {"paths", r.paths},
          {"method", to_string(r.method)},
          {"entries_tested", r.entries_tested},
          {"max_abs_z", r.max_abs_z},
          {"z_threshold", r.z_threshold},
          {"lags", r.lags},
          {"mean_square_increments", r.mean_square_increments},
          {"fitted_slope", r.fitted_slope},
          {"slope_tolerance", r.slope_tolerance},
          {"pass", r.pass()}};
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = {{"drift", c.problem.drift.name},
                      {"sigma", c.problem.sigma},
                      {"x0", c.problem.x0},
                      {"T", c.problem.horizon},
                      {"H", c.hurst},
                      {"levels", c.level_exponents},
                      {"ref", c.ref_exponent},
                      {"paths", c.paths},
                      {"seed", c.master_seed},
                      {"method", to_string(c.sampler_method)},
                      {"workers", c.workers},
                      {"reference", to_string(c.reference)},
                      {"bootstrap_resamples", c.bootstrap_resamples}};
  if (c.problem.drift.linear_coefficient) j["A"] = *c.problem.drift.linear_coefficient;
  return j;
}

nlohmann::json to_json(const RateFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"r_squared", f.r_squared},
          {"rows_used", f.rows_used}};
}

nlohmann::json to_json(const ErrorCurve& c) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : c.rows)
    rows.push_back({{"level", r.level},
                    {"h", r.h},
                    {"error", r.error},
                    {"stderr", r.std_error},
                    {"argmax_time", r.argmax_time}});
  return {{"rows", rows},
          {"slope_bootstrap_stderr", c.slope_std_error},
          {"warnings", c.warnings},
          {"sup_over", "coarse grid times"}};
}

nlohmann::json manifest(const ErrorCurve& c, const RateFit& fit, double theory, bool pass) {
  return {{"version", version_string()},
          {"config", to_json(c.config)},
          {"curve", to_json(c)},
          {"fit", to_json(fit)},
          {"theory", theory},
          {"pass", pass},
          {"wall_seconds", c.wall_seconds},
          {"level_seconds", c.level_seconds}};
}

}  // namespace roughsde
