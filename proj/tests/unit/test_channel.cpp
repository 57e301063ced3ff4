#include <doctest.h>

#include <cmath>
#include <numbers>

#include "anchoropt/channel.hpp"
#include "anchoropt/error.hpp"

using namespace anchoropt;
using namespace anchoropt::channel;
using std::numbers::pi;

TEST_CASE("free-space path loss") {
  CHECK(fspl_db(1.0, 10e9) == doctest::Approx(52.44177218604868).epsilon(1e-14));
  CHECK(fspl_db(20.0, 10e9) - fspl_db(10.0, 10e9) ==
        doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-13));
  CHECK_THROWS_AS(fspl_db(0.0, 10e9), DomainError);
  CHECK_THROWS_AS(fspl_db(1.0, -1.0), DomainError);
}

TEST_CASE("knife-edge loss") {
  CHECK(ked_excess_loss_db(0.1) == 6.9);
  CHECK(ked_excess_loss_db(0.0) == doctest::Approx(6.032852208563606).epsilon(1e-14));
  double prev = ked_excess_loss_db(0.0);
  for (int i = 1; i <= 50000; ++i) {
    const double v = ked_excess_loss_db(i * 1e-3);
    REQUIRE(v > prev);
    prev = v;
  }
  CHECK(prev > 0.0);
}

TEST_CASE("Fresnel parameter of the reference link") {
  CHECK(fresnel_nu({0, -4, 6}, {0, 3, 0}, 10e9) ==
        doctest::Approx(33.65739321063260).epsilon(1e-13));
  CHECK(fresnel_nu({3, -4, 1.5}, {0, 3, 1.5}, 10e9) == 0.0);
}

TEST_CASE("SNR budget of a line-of-sight link") {
  SystemParams sys;
  const LinkBudget lb = snr_db(sys, {0, -20, 1.5}, {0, 7.5, 1.5});
  CHECK(lb.fspl_db == doctest::Approx(81.22842606265393).epsilon(1e-13));
  CHECK(lb.noise_floor_db == doctest::Approx(-120.96488723758829 + 5.0).epsilon(1e-13));
  CHECK(lb.ked_loss_db == 0.0);
  CHECK(lb.snr_db == doctest::Approx(54.73646117493436).epsilon(1e-13));
  CHECK(lb.snr_linear == doctest::Approx(std::pow(10.0, lb.snr_db / 10)).epsilon(1e-14));

  sys.ked_mode = KedMode::kContinuous;
  const LinkBudget cont = snr_db(sys, {0, -20, 1.5}, {0, 7.5, 1.5});
  CHECK(cont.ked_loss_db == doctest::Approx(ked_excess_loss_db(0.0)));
  CHECK(cont.snr_db == doctest::Approx(lb.snr_db - ked_excess_loss_db(0.0)).epsilon(1e-13));
}

TEST_CASE("diffracted links lose the KED term") {
  SystemParams sys;
  const Vec3 a{2, -20, 6}, t{0, 7.5, 1.5};
  const LinkBudget lb = snr_db(sys, a, t);
  CHECK(lb.intrusion_m == doctest::Approx(4.5));
  CHECK(lb.ked_loss_db == doctest::Approx(ked_excess_loss_db(fresnel_nu(a, t, sys.carrier_hz))));
  CHECK(lb.ked_loss_db > 6.9);
}

TEST_CASE("ranging weight") {
  CHECK(ranging_weight(1.0, 200e6) == doctest::Approx(8 * pi * pi / 27).epsilon(1e-14));
  CHECK(ranging_weight(4.0, 100e6) == doctest::Approx(ranging_weight(1.0, 200e6)).epsilon(1e-14));
  CHECK_THROWS_AS(ranging_weight(0.0, 1e6), DomainError);
  CHECK_THROWS_AS(ranging_weight(1.0, 0.0), DomainError);
}
