#include "dfg/toy_tasks.hpp"

#include <cmath>

#include "dfg/error.hpp"
#include "dfg/sampling.hpp"

namespace dfg {

namespace {

constexpr double kPi = 3.14159265358979323846;

Point3 unit_vector(Rng& rng) {
  while (true) {
    Point3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    if (n > 1e-6) return v * (1.0 / n);
  }
}

Point3 sphere_point(double radius, Rng& rng) { return unit_vector(rng) * radius; }

double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// Uniform sample of the surface of an axis-aligned cube of half-extent h.
Point3 cube_surface_point(double h, Rng& rng, int* face_out) {
  const int face = rng.uniform_int(6);
  const double u = rng.uniform(-h, h);
  const double v = rng.uniform(-h, h);
  if (face_out != nullptr) *face_out = face;
  switch (face) {
    case 0: return {+h, u, v};
    case 1: return {-h, u, v};
    case 2: return {u, +h, v};
    case 3: return {u, -h, v};
    case 4: return {u, v, +h};
    default: return {u, v, -h};
  }
}

// Cylinder: radius r, height hgt, axis z, centered. Caps included; parts
// chosen proportionally to area.
Point3 cylinder_surface_point(double r, double hgt, Rng& rng) {
  const double lateral = 2.0 * kPi * r * hgt;
  const double caps = 2.0 * kPi * r * r;
  const double pick = rng.uniform(0.0, lateral + caps);
  if (pick < lateral) {
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double z = rng.uniform(-hgt / 2.0, hgt / 2.0);
    return {r * std::cos(phi), r * std::sin(phi), z};
  }
  const double z = pick < lateral + caps / 2.0 ? hgt / 2.0 : -hgt / 2.0;
  const double rr = r * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  return {rr * std::cos(phi), rr * std::sin(phi), z};
}

PointCloud downsample_to(const PointCloud& cloud, int count) {
  if (cloud.size() <= count) return cloud;
  const SampleResult sel = fps(cloud, count, lexicographic_min_index(cloud));
  PointCloud out;
  out.points.reserve(count);
  for (int idx : sel.indices) out.points.push_back(cloud[idx]);
  return out;
}

}  // namespace

ToyTask parse_toy_task(const std::string& name) {
  if (name == "sphere") return ToyTask::SphereMinusCap;
  if (name == "cube") return ToyTask::CubeMinusFace;
  if (name == "cylinder") return ToyTask::CylinderMinusHalf;
  throw Error(ErrorCode::ConfigError, "unknown toy task: " + name);
}

std::string toy_task_name(ToyTask task) {
  switch (task) {
    case ToyTask::SphereMinusCap: return "sphere";
    case ToyTask::CubeMinusFace: return "cube";
    default: return "cylinder";
  }
}

ToyInstance sample_toy(ToyTask task, int gt_points, int partial_points, Rng& rng) {
  if (gt_points < 8 || partial_points < 1) {
    throw Error(ErrorCode::BadArgument, "toy task needs gt_points >= 8, partial_points >= 1");
  }
  ToyInstance inst;
  inst.ground_truth.points.reserve(gt_points);
  PointCloud kept;

  switch (task) {
    case ToyTask::SphereMinusCap: {
      const double radius = 0.4;
      const Point3 cap_dir = unit_vector(rng);
      const double cos_cap = 0.5;  // removes the cap subtending ~25% of the area
      for (int i = 0; i < gt_points; ++i) {
        const Point3 p = sphere_point(radius, rng);
        inst.ground_truth.points.push_back(p);
        if (dot(p, cap_dir) < cos_cap * radius) kept.points.push_back(p);
      }
      break;
    }
    case ToyTask::CubeMinusFace: {
      const double h = 0.4;
      const int removed_face = rng.uniform_int(6);
      for (int i = 0; i < gt_points; ++i) {
        int face = 0;
        const Point3 p = cube_surface_point(h, rng, &face);
        inst.ground_truth.points.push_back(p);
        if (face != removed_face) kept.points.push_back(p);
      }
      break;
    }
    case ToyTask::CylinderMinusHalf: {
      const double r = 0.3, hgt = 0.8;
      const double cut_phi = rng.uniform(0.0, 2.0 * kPi);
      const Point3 cut_dir{std::cos(cut_phi), std::sin(cut_phi), 0.0};
      for (int i = 0; i < gt_points; ++i) {
        const Point3 p = cylinder_surface_point(r, hgt, rng);
        inst.ground_truth.points.push_back(p);
        if (p.x * cut_dir.x + p.y * cut_dir.y <= 0.0) kept.points.push_back(p);
      }
      break;
    }
  }

  if (kept.empty()) kept.points.push_back(inst.ground_truth.points.front());
  inst.partial = downsample_to(kept, partial_points);
  return inst;
}

PointCloud sphere_plane_composite(int n_sphere, int n_plane, Rng& rng,
                                  std::vector<bool>* is_sphere) {
  PointCloud cloud;
  cloud.points.reserve(n_sphere + n_plane);
  if (is_sphere != nullptr) {
    is_sphere->clear();
    is_sphere->reserve(n_sphere + n_plane);
  }
  const Point3 sphere_center{-0.25, 0.0, 0.0};
  for (int i = 0; i < n_sphere; ++i) {
    cloud.points.push_back(sphere_center + sphere_point(0.2, rng));
    if (is_sphere != nullptr) is_sphere->push_back(true);
  }
  for (int i = 0; i < n_plane; ++i) {
    cloud.points.push_back({rng.uniform(0.05, 0.45), rng.uniform(-0.2, 0.2), 0.0});
    if (is_sphere != nullptr) is_sphere->push_back(false);
  }
  return cloud;
}

}  // namespace dfg
