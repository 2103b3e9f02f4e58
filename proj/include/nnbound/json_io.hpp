#pragma once

#include <string>

#include <Eigen/Dense>

#include "json.hpp"

namespace nnbound {

/** Whole-file read; throws ParseError if the file cannot be opened. */
std::string read_text_file(const std::string& path);

double json_number(const nlohmann::json& j, const std::string& what);
Eigen::VectorXd json_vector(const nlohmann::json& j, const std::string& what);
nlohmann::json to_json_array(const Eigen::VectorXd& v);

}  // namespace nnbound
