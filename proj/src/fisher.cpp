#include "anchoropt/fisher.hpp"

#include <cmath>
#include <string>

#include "anchoropt/error.hpp"
#include "anchoropt/geometry.hpp"

namespace anchoropt::fisher {

namespace {

double lateral(const Vec3& anchor, const Vec3& target) {
  return std::hypot(anchor.y, anchor.z - target.z) + target.y;
}

}  // namespace

double info_angle(const Vec3& anchor, const Vec3& target) {
  geometry::check_link(anchor, target);
  return std::atan2(lateral(anchor, target), target.x - anchor.x);
}

Eigen::Vector2d info_vector(const Vec3& anchor, const Vec3& target) {
  const double p = geometry::path_length_simplified(anchor, target);
  return {(target.x - anchor.x) / p, lateral(anchor, target) / p};
}

InfoSummary summarize(std::span<const InfoComponent> components,
                      std::span<const std::size_t> selection) {
  if (selection.empty()) throw DomainError("summarize: selection is empty");
  InfoSummary s;
  for (std::size_t idx : selection) {
    if (idx >= components.size()) {
      throw DomainError("summarize: index " + std::to_string(idx) + " out of range");
    }
    const InfoComponent& c = components[idx];
    s.S += c.lambda;
    s.u += c.lambda * std::cos(2.0 * c.psi);
    s.v += c.lambda * std::sin(2.0 * c.psi);
  }
  s.r = std::hypot(s.u, s.v);
  return s;
}

InfoSummary summarize(std::span<const InfoComponent> components) {
  std::vector<std::size_t> all(components.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return summarize(components, all);
}

Eigen::Matrix2d fim_2d(const InfoSummary& s) {
  Eigen::Matrix2d m;
  m << s.S + s.u, s.v, s.v, s.S - s.u;
  return 0.5 * m;
}

Eigen::Matrix2d fim_from_jacobian(std::span<const Vec3> anchors, const Vec3& target,
                                  std::span<const double> lambdas) {
  if (anchors.empty()) throw DomainError("fim_from_jacobian: at least one anchor required");
  if (anchors.size() != lambdas.size()) {
    throw DomainError("fim_from_jacobian: anchors and weights differ in length");
  }
  Eigen::MatrixXd J(anchors.size(), 2);
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    J.row(static_cast<Eigen::Index>(k)) = info_vector(anchors[k], target).transpose();
  }
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(lambdas.data(), lambdas.size());
  return J.transpose() * w.asDiagonal() * J;
}

Eigen::Vector2d fim_eigenvalues(const InfoSummary& s) {
  return {(s.S - s.r) / 2.0, (s.S + s.r) / 2.0};
}

bool is_singular(const InfoSummary& s) { return !(s.S > 0) || s.r >= s.S - 1e-12 * s.S; }

ObjectiveTriple objectives(const InfoSummary& s) {
  if (is_singular(s)) {
    throw SingularError("objectives: FIM is singular (r >= S); geometry cannot localize the target");
  }
  const double det4 = (s.S - s.r) * (s.S + s.r);
  return {4.0 * s.S / det4, 4.0 / det4, 2.0 / (s.S - s.r)};
}

MetricTriple metrics(const InfoSummary& s) {
  const ObjectiveTriple o = objectives(s);
  return {std::sqrt(o.phi_a), std::sqrt(kChi2_2_95 * std::sqrt(o.phi_d)), std::sqrt(o.phi_e)};
}

}  // namespace anchoropt::fisher
