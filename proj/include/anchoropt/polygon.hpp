#pragma once

#include <span>
#include <vector>

#include "anchoropt/fisher.hpp"
#include "anchoropt/scene.hpp"

namespace anchoropt::polygon {

/// Orientations theta_k = 2 psi_k of a closed polygon with side lengths lambda_k.
struct ClosureResult {
  std::vector<double> angles;  // in [0, 2 pi), input order
  double residual = 0.0;       // |sum lambda_k e^{j theta_k}|
  bool feasible = false;
  // Some theta_k == 0, i.e. psi_k = 0 is outside the open range (0, pi).
  bool has_boundary_angle = false;
};

/// max lambda <= sum of the others. Needs at least two positive weights.
bool closure_feasible(std::span<const double> lambdas);

/// |sum lambda_k e^{j theta_k}|.
double closure_residual(std::span<const double> lambdas, std::span<const double> angles);

/// Closes the polygon by splitting the weights into three collinear groups
/// (the largest alone, the rest balanced greedily) that form a triangle.
/// Infeasible weights give feasible = false rather than an exception.
ClosureResult closure_angles(std::span<const double> lambdas);

/// Optimal single-target objectives 4/S, 4/S^2, 2/S. Throws DomainError if
/// the weights cannot close a polygon.
fisher::ObjectiveTriple single_target_optimum(std::span<const double> lambdas);

/// An anchor on the target's floor plane at depth y_k < 0 whose information
/// angle is psi. One canonical branch of a non-unique inversion.
Vec3 anchor_for_angle(const Vec3& target, double psi, double y_k);

}  // namespace anchoropt::polygon
