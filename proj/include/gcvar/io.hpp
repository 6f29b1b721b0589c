#pragma once

#include "gcvar/linalg.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace gcvar {

/// Shortest text that round-trips the double exactly.
std::string format_double(double x);

/// Row-major CSV; header is an empty corner cell followed by column names,
/// each row starts with its name.
std::string matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& row_names,
                       const std::vector<std::string>& col_names);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace gcvar
