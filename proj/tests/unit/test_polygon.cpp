#include <doctest.h>

#include <cmath>
#include <numbers>

#include "anchoropt/error.hpp"
#include "anchoropt/fisher.hpp"
#include "anchoropt/polygon.hpp"
#include "generators.hpp"

using namespace anchoropt;
using namespace anchoropt::polygon;
using std::numbers::pi;

namespace {
const std::vector<double> kFig2{1.5, 2.0, 2.3, 2.5};
}

TEST_CASE("published four-anchor closure") {
  CHECK(closure_feasible(kFig2));
  std::vector<double> deg{138.2, 314.7, 17.2, 186.0}, rad;
  for (double d : deg) rad.push_back(d * pi / 180);
  CHECK(closure_residual(kFig2, rad) == doctest::Approx(0.0030503116903048).epsilon(1e-10));

  const ClosureResult c = closure_angles(kFig2);
  REQUIRE(c.feasible);
  CHECK(c.residual <= 1e-9 * 8.3);
  const auto opt = single_target_optimum(kFig2);
  CHECK(opt.phi_a == doctest::Approx(4 / 8.3).epsilon(1e-14));
  CHECK(opt.phi_d == doctest::Approx(4 / (8.3 * 8.3)).epsilon(1e-14));
  CHECK(opt.phi_e == doctest::Approx(2 / 8.3).epsilon(1e-14));
}

TEST_CASE("infeasible and invalid weights") {
  const std::vector<double> heavy{1.0, 1.0, 5.0};
  CHECK_FALSE(closure_feasible(heavy));
  CHECK_FALSE(closure_angles(heavy).feasible);
  CHECK_THROWS_AS(single_target_optimum(heavy), DomainError);
  CHECK_THROWS_AS(closure_feasible(std::vector<double>{1.0}), DomainError);
  CHECK_THROWS_AS(closure_feasible(std::vector<double>{1.0, -1.0}), DomainError);
  // Equality is a degenerate but closed polygon.
  CHECK(closure_feasible(std::vector<double>{1.0, 1.0, 2.0}));
  CHECK(closure_angles(std::vector<double>{1.0, 1.0, 2.0}).residual <= 1e-12);
  CHECK(closure_angles(std::vector<double>{3.0, 3.0}).residual <= 1e-12);
}

TEST_CASE("property: constructive closure") {
  Rng rng(41);
  int feasible = 0;
  for (int it = 0; it < 2000; ++it) {
    const auto w = testing::random_weights(rng, 2 + rng.below(9));
    double S = 0, mx = 0;
    for (double x : w) {
      S += x;
      mx = std::max(mx, x);
    }
    const bool expect = mx <= S - mx;
    REQUIRE(closure_feasible(w) == expect);
    const ClosureResult c = closure_angles(w);
    REQUIRE(c.feasible == expect);
    if (!expect) continue;
    ++feasible;
    REQUIRE(c.residual <= 1e-9 * S);
    // At closure the three objectives meet their single-target optima.
    std::vector<fisher::InfoComponent> comp;
    for (std::size_t k = 0; k < w.size(); ++k) comp.push_back({w[k], c.angles[k] / 2});
    fisher::InfoSummary s = fisher::summarize(comp);
    const auto o = fisher::objectives(s);
    const auto opt = single_target_optimum(w);
    REQUIRE(o.phi_a == doctest::Approx(opt.phi_a).epsilon(1e-8));
    REQUIRE(o.phi_d == doctest::Approx(opt.phi_d).epsilon(1e-8));
    REQUIRE(o.phi_e == doctest::Approx(opt.phi_e).epsilon(1e-8));
  }
  CHECK(feasible > 500);
}

TEST_CASE("property: anchor for a prescribed angle") {
  Rng rng(42);
  for (int it = 0; it < 1000; ++it) {
    const Vec3 t = testing::random_target(rng);
    const double psi = rng.uniform(0.05, pi - 0.05);
    const double yk = rng.uniform(-30, -1);
    const Vec3 a = anchor_for_angle(t, psi, yk);
    REQUIRE(a.y == yk);
    REQUIRE(a.z == t.z);
    REQUIRE(fisher::info_angle(a, t) == doctest::Approx(psi).epsilon(1e-12));
  }
  CHECK_THROWS_AS(anchor_for_angle({0, 1, 1.5}, 0.0, -1), DomainError);
  CHECK_THROWS_AS(anchor_for_angle({0, 1, 1.5}, 1.0, 0.5), DomainError);
}
