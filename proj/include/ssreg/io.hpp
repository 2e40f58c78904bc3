#pragma once

#include "ssreg/common.hpp"
#include "ssreg/lti.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace ssreg {

// Shortest round-trip decimal representation; identical bytes for identical doubles.
std::string format_double(double value);

// One CSV line per matrix row, comma separated, no header.
std::string matrix_to_csv_rows(const Matrix& M);

nlohmann::json matrix_to_json(const Matrix& M);  // array of rows
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json system_to_json(const LtiSystem& sys);
LtiSystem system_from_json(const nlohmann::json& j);

/**
 * Trajectory CSV. Header `k,u_0..u_{m-1},x_0..x_{n-1},y_0..y_{p-1},w_0..w_{r-1}`,
 * absent blocks (no states / no disturbances) omitted from the header.
 * Rows run over the longest signal; cells past the end of a shorter signal
 * (the final input and disturbance sample) are left empty.
 */
std::string trajectory_to_csv(const Trajectory& traj);
Trajectory trajectory_from_csv(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ssreg
