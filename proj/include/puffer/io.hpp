#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

#include "puffer/experiments.hpp"
#include "puffer/types.hpp"

namespace puffer::io {

using Json = nlohmann::ordered_json;

/// Rectangular numeric table with a named header row.
struct Dataset {
    std::vector<std::string> header;
    Eigen::MatrixXd values;  // row-major table stored column-wise
};

/// RFC-4180-style reader: header required, quoted fields supported, every
/// body cell must parse as a finite real. Throws ParseError with the
/// offending cell's location.
Dataset read_csv(const std::string& path);

/// Splits the table into response and design: the designated column (name or
/// 1-based index) becomes Y, the remaining columns become X in header order.
RegressionProblem load_csv(const std::string& path, const std::string& y_column);

/// Full-precision (17 significant digits) decimal formatting; round-trips
/// doubles exactly.
std::string format_double(double value);

void write_dataset_csv(const std::string& path, const std::vector<std::string>& header,
                       const Eigen::MatrixXd& values);

/// Writes Y as the first column ("y") followed by x1..xp.
void write_problem_csv(const std::string& path, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& Y);

/// Writes a bare design matrix with header x1..xp.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& X);

/// Experiment result table: fixed key columns, then metric columns sorted by
/// name (union over rows). Missing metrics are empty cells.
std::string result_to_csv(const experiments::ExperimentResult& result);

/// One-to-one JSON mirror of ExperimentConfig; unknown keys are an error.
experiments::ExperimentConfig parse_experiment_config(const Json& j);
experiments::ExperimentConfig load_experiment_config(const std::string& path);
Json experiment_config_to_json(const experiments::ExperimentConfig& config);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace puffer::io
