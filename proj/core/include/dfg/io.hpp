#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dfg/point_cloud.hpp"

namespace dfg {

/// Reads an ASCII XYZ file: one point per line, >= 3 whitespace-separated
/// numeric fields (extra fields ignored), '#'-prefixed lines skipped.
/// Throws MissingFile, MalformedLine (detail = 1-based line number) or
/// EmptyCloud.
PointCloud load_xyz(const std::string& path);

/// Writes one "x y z" line per point. Coordinates use shortest
/// round-trip decimal encoding, so load_xyz(save_xyz(c)) == c exactly.
void save_xyz(const PointCloud& cloud, const std::string& path);

/// ASCII PLY 1.0 with float32 x/y/z plus one named float property per vertex.
void save_ply_scalar(const PointCloud& cloud, const std::vector<double>& scalar,
                     const std::string& name, const std::string& path);

/// Same format with several named properties (e.g. detail + degree maps).
void save_ply_scalars(const PointCloud& cloud,
                      const std::vector<std::pair<std::string, std::vector<double>>>& scalars,
                      const std::string& path);

/// Shortest decimal encoding that parses back to the identical double.
std::string format_double(double v);

}  // namespace dfg
