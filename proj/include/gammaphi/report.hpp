#pragma once

#include <json.hpp>

#include <Eigen/Core>

#include <string>

namespace gammaphi {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr int kReportSchemaVersion = 1;

/// JSON value for a real: plain number when finite, "Infinity"/"-Infinity"/
/// "NaN" strings otherwise (JSON has no literals for these).
nlohmann::json json_real(double x);

nlohmann::json json_vector(const Eigen::Ref<const Eigen::VectorXd>& v);

/// Canonical serialization shared by every report writer: two-space indent,
/// keys in lexicographic order. Reports compare byte-for-byte across runs.
std::string dump_report(const nlohmann::json& j);

}  // namespace gammaphi
