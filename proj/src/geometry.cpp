#include "anchoropt/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "anchoropt/error.hpp"

namespace anchoropt::geometry {

void check_link(const Vec3& anchor, const Vec3& target) {
  if (!is_finite(anchor) || !is_finite(target)) {
    throw DomainError("geometry: non-finite anchor or target coordinates");
  }
  if (!(target.y > 0.0) || !(anchor.y < 0.0)) {
    throw DomainError("geometry: anchor and target must lie on opposite sides of the wall "
                      "(anchor.y < 0 < target.y)");
  }
}

namespace {

// Perpendicular distances from target and anchor to the edge line.
struct EdgeDistances {
  double target_perp;
  double anchor_perp;
};

EdgeDistances edge_distances(const Vec3& anchor, const Vec3& target, Edge edge, double delta) {
  const double dz = target.z + edge_sign(edge) * delta - anchor.z;
  return {std::hypot(target.y, delta), std::hypot(anchor.y, dz)};
}

}  // namespace

double diffraction_point_x(const Vec3& anchor, const Vec3& target, Edge edge, double delta) {
  check_link(anchor, target);
  const auto [r, r_perp] = edge_distances(anchor, target, edge, delta);
  return (r * anchor.x + r_perp * target.x) / (r + r_perp);
}

double path_length_edge(const Vec3& anchor, const Vec3& target, Edge edge, double delta) {
  check_link(anchor, target);
  const auto [r, r_perp] = edge_distances(anchor, target, edge, delta);
  return std::hypot(anchor.x - target.x, r_perp + r);
}

double path_length(const Vec3& anchor, const Vec3& target, double delta) {
  return std::min(path_length_edge(anchor, target, Edge::kUpper, delta),
                  path_length_edge(anchor, target, Edge::kLower, delta));
}

double path_length_simplified(const Vec3& anchor, const Vec3& target) {
  check_link(anchor, target);
  const double lateral = std::hypot(anchor.y, anchor.z - target.z) + target.y;
  return std::hypot(anchor.x - target.x, lateral);
}

PathGeometry path_geometry(const Vec3& anchor, const Vec3& target) {
  PathGeometry g;
  g.diffraction_point = {diffraction_point_x(anchor, target, Edge::kUpper, 0.0), 0.0, target.z};
  g.d1_m = norm(anchor - g.diffraction_point);
  g.d2_m = norm(target - g.diffraction_point);
  g.path_length_m = path_length_simplified(anchor, target);
  return g;
}

FresnelDistances fresnel_distances(const Vec3& anchor, const Vec3& target) {
  const PathGeometry g = path_geometry(anchor, target);
  return {g.d1_m, g.d2_m};
}

}  // namespace anchoropt::geometry
