#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace vcm::io {

/// Writes content to a temporary file in the target directory and renames it
/// into place, so readers never observe partial files.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// Plain numeric CSV, one matrix row per line, %.17g fields.
std::string matrix_to_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_csv(const std::filesystem::path& path);

/// {"rows": r, "cols": c, "data": [[...], ...]}.
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

}  // namespace vcm::io
