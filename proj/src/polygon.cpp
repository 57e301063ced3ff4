#include "anchoropt/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "anchoropt/error.hpp"

namespace anchoropt::polygon {

using std::numbers::pi;

namespace {

void check_weights(std::span<const double> lambdas) {
  if (lambdas.size() < 2) throw DomainError("polygon: at least two weights required");
  for (double l : lambdas) {
    if (!(l > 0) || !std::isfinite(l)) throw DomainError("polygon: weights must be positive");
  }
}

double normalize_angle(double a) {
  double m = std::fmod(a, 2.0 * pi);
  if (m < 0) m += 2.0 * pi;
  if (m >= 2.0 * pi) m = 0.0;
  return m;
}

}  // namespace

bool closure_feasible(std::span<const double> lambdas) {
  check_weights(lambdas);
  const auto it = std::max_element(lambdas.begin(), lambdas.end());
  double others = 0.0;
  for (auto j = lambdas.begin(); j != lambdas.end(); ++j)
    if (j != it) others += *j;
  return *it <= others;
}

double closure_residual(std::span<const double> lambdas, std::span<const double> angles) {
  std::complex<double> z = 0.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) z += std::polar(lambdas[k], angles[k]);
  return std::abs(z);
}

ClosureResult closure_angles(std::span<const double> lambdas) {
  ClosureResult out;
  out.feasible = closure_feasible(lambdas);
  if (!out.feasible) return out;

  const std::size_t K = lambdas.size();
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });

  // group 0 = largest weight; the rest go to whichever of groups 1, 2 is lighter.
  std::vector<int> group(K, 0);
  double side[3] = {lambdas[order[0]], 0.0, 0.0};
  for (std::size_t i = 1; i < K; ++i) {
    const int g = side[1] <= side[2] ? 1 : 2;
    group[order[i]] = g;
    side[g] += lambdas[order[i]];
  }

  // Triangle P0 = 0, P1 = a along 0 rad, P2 at distance c from P0 and b from P1.
  const double a = side[0], b = side[1], c = side[2];
  double dir[3] = {0.0, pi, 0.0};
  if (c == 0.0) {
    dir[1] = pi;  // degenerate: a == b
  } else {
    const double cos_phi = std::clamp((a * a + c * c - b * b) / (2.0 * a * c), -1.0, 1.0);
    const double phi = std::acos(cos_phi);
    const std::complex<double> p1(a, 0.0);
    const std::complex<double> p2 = std::polar(c, phi);
    dir[1] = b > 0.0 ? std::arg(p2 - p1) : 0.0;
    dir[2] = std::arg(-p2);
  }

  out.angles.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    out.angles[k] = normalize_angle(dir[group[k]]);
    if (out.angles[k] == 0.0) out.has_boundary_angle = true;
  }
  out.residual = closure_residual(lambdas, out.angles);
  return out;
}

fisher::ObjectiveTriple single_target_optimum(std::span<const double> lambdas) {
  if (!closure_feasible(lambdas)) {
    throw DomainError("single_target_optimum: weights violate the polygon inequality "
                      "(max lambda > sum of the others), closure is impossible");
  }
  const double S = std::accumulate(lambdas.begin(), lambdas.end(), 0.0);
  return {4.0 / S, 4.0 / (S * S), 2.0 / S};
}

Vec3 anchor_for_angle(const Vec3& target, double psi, double y_k) {
  if (!(psi > 0.0 && psi < pi)) throw DomainError("anchor_for_angle: psi must lie in (0, pi)");
  if (!(y_k < 0.0)) throw DomainError("anchor_for_angle: anchor depth y_k must be < 0");
  const double lateral = std::abs(y_k) + target.y;
  const double x = psi == pi / 2 ? target.x : target.x - lateral * std::cos(psi) / std::sin(psi);
  return {x, y_k, target.z};
}

}  // namespace anchoropt::polygon
