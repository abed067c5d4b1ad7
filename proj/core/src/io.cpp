#include "dfg/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dfg/error.hpp"

namespace dfg {

namespace {

bool parse_field(const std::string& tok, double& out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) return false;
  return std::isfinite(out);
}

void check_property_name(const std::string& name) {
  if (name.empty()) throw Error(ErrorCode::BadArgument, "PLY property name must be non-empty");
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
      throw Error(ErrorCode::BadArgument, "PLY property name must be [A-Za-z0-9_]: " + name);
    }
  }
}

std::string format_float(float v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

PointCloud load_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path);

  PointCloud cloud;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;       // blank
    if (line[first] == '#') continue;               // comment

    std::istringstream ls(line);
    std::string tok;
    double coords[3];
    int got = 0;
    while (got < 3 && (ls >> tok)) {
      if (!parse_field(tok, coords[got])) {
        throw Error(ErrorCode::MalformedLine,
                    "non-numeric field on line " + std::to_string(lineno) + " of " + path, lineno);
      }
      ++got;
    }
    if (got < 3) {
      throw Error(ErrorCode::MalformedLine,
                  "fewer than 3 fields on line " + std::to_string(lineno) + " of " + path, lineno);
    }
    cloud.points.push_back({coords[0], coords[1], coords[2]});
  }
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "no points in " + path);
  return cloud;
}

void save_xyz(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  for (const Point3& p : cloud.points) {
    out << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

void save_ply_scalar(const PointCloud& cloud, const std::vector<double>& scalar,
                     const std::string& name, const std::string& path) {
  save_ply_scalars(cloud, {{name, scalar}}, path);
}

void save_ply_scalars(const PointCloud& cloud,
                      const std::vector<std::pair<std::string, std::vector<double>>>& scalars,
                      const std::string& path) {
  for (const auto& [name, values] : scalars) {
    check_property_name(name);
    if (static_cast<int>(values.size()) != cloud.size()) {
      throw Error(ErrorCode::LengthMismatch,
                  "property '" + name + "' has " + std::to_string(values.size()) +
                      " values for " + std::to_string(cloud.size()) + " points");
    }
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);

  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  for (const auto& [name, values] : scalars) out << "property float " << name << "\n";
  out << "end_header\n";

  for (int i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud[i];
    out << format_float(static_cast<float>(p.x)) << ' ' << format_float(static_cast<float>(p.y))
        << ' ' << format_float(static_cast<float>(p.z));
    for (const auto& [name, values] : scalars) {
      out << ' ' << format_float(static_cast<float>(values[i]));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

}  // namespace dfg
