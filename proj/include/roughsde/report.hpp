#pragma once

// JSON views of reports and run manifests.

#include <json.hpp>

#include "roughsde/harness.hpp"
#include "roughsde/sampler.hpp"
#include "roughsde/variation.hpp"

namespace roughsde {

const char* version_string();

nlohmann::json to_json(const ScalingReport& r);
nlohmann::json to_json(const NegativityReport& r);
nlohmann::json to_json(const YoungDiagnostic& d);
nlohmann::json to_json(const SelfTestReport& r);
nlohmann::json to_json(const ExperimentConfig& c);
nlohmann::json to_json(const RateFit& f);
// Deterministic part of a curve: rows, slope uncertainty, warnings.
nlohmann::json to_json(const ErrorCurve& c);
// Run manifest: config echo, version, timings, fitted rate and verdict.
nlohmann::json manifest(const ErrorCurve& c, const RateFit& fit, double theory, bool pass);

}  // namespace roughsde
