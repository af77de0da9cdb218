#pragma once

#include <string>

#include <json.hpp>

#include "wellposed/conditions.hpp"
#include "wellposed/model.hpp"

namespace wellposed {

inline constexpr const char* kToolVersion = "0.1.0";

/// Parses the JSON problem description (// comments permitted). Keys:
///   p, q            dimensions
///   mu              array, length p
///   gamma           {"tau2": s} or {"full": row-major p*p array}
///   sigma           {"sigma2": s} or {"full": row-major q*q array}
///   forward         {"H": row-major q*p array}
///                 | {"builtin": name, "params": {...}}
///                 | {"command": argv array}
///   c               optional, default 4.0
///   n_obs           optional
///   oracle          optional {"seed": int, "n": int}
ProblemSpec parse_spec_json(const nlohmann::json& doc);
ProblemSpec load_spec_file(const std::string& path);

/// FNV-1a 64-bit digest of the raw spec file bytes, hex encoded.
std::string file_digest(const std::string& path);

nlohmann::json verdict_to_json(const ConditionVerdict& v);
ConditionVerdict verdict_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const WellPosednessReport& report,
                              const std::string& input_digest);
WellPosednessReport report_from_json(const nlohmann::json& j);

Matrix matrix_from_json(const nlohmann::json& j, int rows, int cols,
                        const std::string& name);
nlohmann::json matrix_to_json(const Matrix& m);

}  // namespace wellposed
