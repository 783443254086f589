#pragma once

#include <string>
#include <utility>

#include "curvflow/common.hpp"

namespace curvflow {

// Write via temp file + rename in the target directory.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// ScalarField CSV: header `theta,u`, ascending theta.
std::pair<std::vector<double>, std::vector<double>> read_field_csv(
    const std::string& path);
std::string field_csv(const std::vector<double>& theta, const std::vector<double>& u);

}  // namespace curvflow
