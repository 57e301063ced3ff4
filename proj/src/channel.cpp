#include "anchoropt/channel.hpp"

#include <cmath>
#include <numbers>

#include "anchoropt/error.hpp"
#include "anchoropt/geometry.hpp"

namespace anchoropt::channel {

using std::numbers::pi;

double fspl_db(double range_m, double carrier_hz) {
  if (!(range_m > 0) || !(carrier_hz > 0)) {
    throw DomainError("fspl_db: range and carrier frequency must be positive");
  }
  return 20.0 * std::log10(4.0 * pi * range_m * carrier_hz / kSpeedOfLight);
}

double ked_excess_loss_db(double nu) {
  const double t = nu - 0.1;
  return 6.9 + 20.0 * std::log10(std::sqrt(t * t + 1.0) + t);
}

double fresnel_nu(const Vec3& anchor, const Vec3& target, double carrier_hz) {
  const auto [d1, d2] = geometry::fresnel_distances(anchor, target);
  const double h = std::abs(anchor.z - target.z);
  return h * std::sqrt(2.0 * carrier_hz * (d1 + d2) / (kSpeedOfLight * d1 * d2));
}

LinkBudget snr_db(const SystemParams& system, const Vec3& anchor, const Vec3& target) {
  LinkBudget lb;
  lb.intrusion_m = std::abs(anchor.z - target.z);
  lb.nu = fresnel_nu(anchor, target, system.carrier_hz);
  const bool los = system.ked_mode == KedMode::kFloorLos && lb.intrusion_m <= kLosTolerance;
  lb.ked_loss_db = los ? 0.0 : ked_excess_loss_db(lb.nu);
  lb.fspl_db = fspl_db(norm(target - anchor), system.carrier_hz);
  lb.noise_floor_db =
      10.0 * std::log10(kBoltzmann * system.noise_temp_k * system.bandwidth_hz) +
      system.noise_figure_db;
  const double tx_dbw = system.tx_power_dbm - 30.0;
  lb.snr_db = tx_dbw + system.tx_gain_dbi + system.rx_gain_dbi - lb.fspl_db - lb.ked_loss_db -
              lb.noise_floor_db;
  lb.snr_linear = std::pow(10.0, lb.snr_db / 10.0);
  return lb;
}

double ranging_weight(double snr_linear, double bandwidth_hz) {
  if (!(snr_linear > 0) || !(bandwidth_hz > 0)) {
    throw DomainError("ranging_weight: SNR and bandwidth must be positive");
  }
  return 2.0 * pi * pi * bandwidth_hz * bandwidth_hz * snr_linear /
         (3.0 * kSpeedOfLight * kSpeedOfLight);
}

}  // namespace anchoropt::channel
