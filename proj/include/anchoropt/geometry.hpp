#pragma once

#include "anchoropt/scene.hpp"

namespace anchoropt::geometry {

// Window edges on the target's floor run parallel to x at z_n +/- delta on y = 0.
enum class Edge { kUpper, kLower };

constexpr double edge_sign(Edge e) { return e == Edge::kUpper ? 1.0 : -1.0; }

struct PathGeometry {
  Vec3 diffraction_point;  // on the wall plane y = 0
  double d1_m = 0.0;       // anchor -> diffraction point
  double d2_m = 0.0;       // diffraction point -> target
  double path_length_m = 0.0;
};

/// Throws DomainError unless anchor.y < 0 < target.y and both are finite.
void check_link(const Vec3& anchor, const Vec3& target);

/// x-coordinate of the least-time diffraction point on `edge`. Always lies
/// between x_k and x_n.
double diffraction_point_x(const Vec3& anchor, const Vec3& target, Edge edge, double delta);

/// Two-edge diffraction path length via `edge` with window half-height delta.
double path_length_edge(const Vec3& anchor, const Vec3& target, Edge edge, double delta);

/// First-arriving path: the shorter of the two edge paths.
double path_length(const Vec3& anchor, const Vec3& target, double delta);

/// delta = 0 path, sqrt((x_k - x_n)^2 + (sqrt(y_k^2 + (z_k - z_n)^2) + y_n)^2).
double path_length_simplified(const Vec3& anchor, const Vec3& target);

/// Full geometry of the delta = 0 path through Q = (x_Q, 0, z_n).
PathGeometry path_geometry(const Vec3& anchor, const Vec3& target);

struct FresnelDistances {
  double d1_m;
  double d2_m;
};

FresnelDistances fresnel_distances(const Vec3& anchor, const Vec3& target);

}  // namespace anchoropt::geometry
