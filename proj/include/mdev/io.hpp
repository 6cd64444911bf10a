#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "mdev/confidence.hpp"
#include "mdev/convex.hpp"
#include "mdev/exit_prob.hpp"
#include "mdev/families.hpp"
#include "mdev/lab.hpp"
#include "mdev/tilting.hpp"

namespace mdev {

using json = nlohmann::json;

// {"kind":"ball","dim":d,"r":r} | {"kind":"ellipsoid","sigma":[...],"r":r}
ConvexBody body_from_json(const json& j);
json body_to_json(const ConvexBody& body);

// {"family":"gaussian_location","sigma2":...} etc.
ParametricFamily family_from_json(const json& j);

// gaussian {mean, cov}, discrete {atoms: [[x..., p], ...]},
// density {box: {lo, hi}, table: [[x..., f], ...]}
TiltableDistribution distribution_from_json(const json& j);

json estimate_to_json(const ExitProbEstimate& e);
json tilt_solution_to_json(const TiltSolution& s);
json a2_report_to_json(const A2Report& r);
json b_report_to_json(const BodyAssumptionReport& r);

ExperimentConfig experiment_config_from_json(const json& j);
json report_to_json(const ExperimentReport& r);
std::string report_to_csv(const ExperimentReport& r);

// stable FNV-1a digest of the canonical (sorted-key) dump
std::string config_hash(const json& j);

// temp file + rename, so a crash never leaves a partial file
void atomic_write(const std::string& path, const std::string& content);

std::string csv_escape(const std::string& field);

}  // namespace mdev
