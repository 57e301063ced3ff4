#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "anchoropt/scene.hpp"

namespace anchoropt::fisher {

/// chi^2 quantile for 2 degrees of freedom at 95%.
inline constexpr double kChi2_2_95 = 5.991;

/// Ranging weight and information angle of one anchor-target link.
struct InfoComponent {
  double lambda = 0.0;
  double psi = 0.0;
};

/// Aggregates of a set of links: S = sum lambda, (u, v) = sum lambda e^{j 2 psi},
/// r = |(u, v)|.
struct InfoSummary {
  double S = 0.0;
  double u = 0.0;
  double v = 0.0;
  double r = 0.0;
};

struct ObjectiveTriple {
  double phi_a;  // trace of the CRLB [m^2]
  double phi_d;  // determinant of the CRLB [m^4]
  double phi_e;  // largest CRLB eigenvalue [m^2]
};

struct MetricTriple {
  double peb_m;
  double cer_m;
  double mad_m;
};

/// psi = atan2(sqrt(y_k^2 + (z_k - z_n)^2) + y_n, x_n - x_k), in (0, pi).
double info_angle(const Vec3& anchor, const Vec3& target);

/// Unit gradient of the path length w.r.t. the target's (x, y).
Eigen::Vector2d info_vector(const Vec3& anchor, const Vec3& target);

InfoSummary summarize(std::span<const InfoComponent> components, std::span<const std::size_t> selection);
InfoSummary summarize(std::span<const InfoComponent> components);

/// (1/2) [[S + u, v], [v, S - u]].
Eigen::Matrix2d fim_2d(const InfoSummary& s);

/// sum_k lambda_k g_k g_k^T.
Eigen::Matrix2d fim_from_jacobian(std::span<const Vec3> anchors, const Vec3& target,
                                  std::span<const double> lambdas);

/// Eigenvalues (S - r)/2, (S + r)/2 in ascending order.
Eigen::Vector2d fim_eigenvalues(const InfoSummary& s);

/// True when r >= S (1 - 1e-12): the FIM is treated as singular.
bool is_singular(const InfoSummary& s);

/// Throws SingularError for singular summaries.
ObjectiveTriple objectives(const InfoSummary& s);
MetricTriple metrics(const InfoSummary& s);

}  // namespace anchoropt::fisher
