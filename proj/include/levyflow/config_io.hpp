#pragma once

#include "levyflow/levy_model.hpp"

#include <json.hpp>

#include <string>

namespace levyflow {

using Json = nlohmann::json;

/// Keys: d, sigma (row-major list of d^4 numbers), gamma and drift0 (lists of
/// rows), jumps.rate, jumps.atoms[i].prob, jumps.atoms[i].matrix,
/// jumps.truncation_eps, optional name.
Json triplet_to_json(const MatrixLevyTriplet& triplet);

/// `where` prefixes key paths in ConfigError messages.
MatrixLevyTriplet triplet_from_json(const Json& doc, const std::string& where = "triplet");

MatrixLevyTriplet load_triplet(const std::string& path);
void save_triplet(const MatrixLevyTriplet& triplet, const std::string& path);

Json matrix_to_json(const MatrixXd& m);
/// Accepts a list of rows or a flat row-major list of rows*cols numbers.
MatrixXd matrix_from_json(const Json& v, Eigen::Index rows, Eigen::Index cols, const std::string& where);

Json read_json_file(const std::string& path);

}  // namespace levyflow
