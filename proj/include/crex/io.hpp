#pragma once

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "crex/degeneracy.hpp"
#include "crex/mplcp.hpp"

namespace crex {

using Json = nlohmann::json;

Json to_json(const Eigen::MatrixXd& M);
Json to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& field);
Eigen::VectorXd vector_from_json(const Json& j, const std::string& field);

/// Fields H, f, A, b, C (dense, row-major nested arrays) and signs
/// ("free" or "nonneg"). "d" is required only when there are no rows.
MpQP problem_from_json(const Json& j);
Json problem_to_json(const MpQP& problem);
/// Throws ParseError for unreadable files or malformed content.
MpQP load_problem(const std::string& path);

Json region_to_json(const CriticalRegion& region);
Json bundle_to_json(const RegionBundle& bundle);

/// Comma-separated numbers, e.g. "0.5,-1".
Eigen::VectorXd parse_csv_vector(const std::string& text);

}  // namespace crex
