#pragma once

#include "isop/domain.hpp"
#include "isop/estimators.hpp"
#include "isop/harness.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace isop {

/// {mean, stderr, n, seed, truncated_fraction[, warning]}. Non-finite
/// numbers serialize as null.
nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const Verdict& v);

/// Estimator record {op, params, mean, stderr, n, seed, truncated_fraction}.
nlohmann::json make_record(const std::string& op, const nlohmann::json& params, const Estimate& e);

/// Flattens a record into CSV. Nested params are written as compact JSON.
std::string csv_header(const nlohmann::json& record);
std::string csv_row(const nlohmann::json& record);
std::string verdict_csv_header();
std::string verdict_csv_row(const Verdict& v);

/// Numbers accept a "pi" factor: "pi/6", "2pi", "-0.5pi".
double parse_number(const std::string& s);
std::vector<double> parse_list(const std::string& s, char sep = ',');
Point parse_point(const std::string& s);

// Typed access to flat parameter maps; values may be JSON numbers/arrays or
// strings in the CLI syntax. Missing keys without a default throw.
double param_number(const nlohmann::json& p, const std::string& key);
double param_number(const nlohmann::json& p, const std::string& key, double def);
std::vector<double> param_list(const nlohmann::json& p, const std::string& key);
std::string param_string(const nlohmann::json& p, const std::string& key);
std::string param_string(const nlohmann::json& p, const std::string& key, const std::string& def);
Point param_point(const nlohmann::json& p, const std::string& key);

/// Domain spec strings:
///   ball:R[@c]            annulus:r1,r2[@c]          rectangle:w,h[,d][@c]
///   polygon:x1,y1,x2,y2,...                          slit-disk:a;θ1,θ2,...
///   ball-union:R@c|R@c... ball-intersection:R@c|R@c...
///   channel:x0,x1,...;l0,l1,...                      raster:path[;outer_radius]
/// Centers default to the origin in `dim` dimensions.
Domain parse_domain(const std::string& spec, int dim = 2);
BallShape parse_ball(const std::string& spec, int dim = 2);

}  // namespace isop
