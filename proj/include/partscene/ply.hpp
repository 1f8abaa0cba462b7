#pragma once

#include <string>

#include "partscene/obb.hpp"

namespace partscene {

// ASCII PLY with x y z float properties, one point per line.
std::string write_ply(const PointCloud& cloud);
PointCloud read_ply(const std::string& text);

}  // namespace partscene
