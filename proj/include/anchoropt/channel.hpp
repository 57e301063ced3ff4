#pragma once

#include "anchoropt/scene.hpp"

namespace anchoropt::channel {

/// Propagation speed used by every link and ranging formula [m/s].
inline constexpr double kSpeedOfLight = 3.0e8;
/// Boltzmann constant [J/K].
inline constexpr double kBoltzmann = 1.380649e-23;
/// Intrusions at or below this height count as line of sight in KedMode::kFloorLos [m].
inline constexpr double kLosTolerance = 1e-3;

struct LinkBudget {
  double fspl_db = 0.0;
  double ked_loss_db = 0.0;
  double noise_floor_db = 0.0;  // 10 log10(K T B) + NF, in dBW
  double snr_db = 0.0;
  double snr_linear = 0.0;
  double nu = 0.0;
  double intrusion_m = 0.0;
};

/// 20 log10(4 pi R f_c / c).
double fspl_db(double range_m, double carrier_hz);

/// Knife-edge excess loss 6.9 + 20 log10(sqrt((nu - 0.1)^2 + 1) + nu - 0.1).
double ked_excess_loss_db(double nu);

/// Fresnel-Kirchhoff parameter with intrusion h = |z_k - z_n|.
double fresnel_nu(const Vec3& anchor, const Vec3& target, double carrier_hz);

/// Received SNR of the diffraction (or LOS) path from anchor to target.
LinkBudget snr_db(const SystemParams& system, const Vec3& anchor, const Vec3& target);

/// Inverse range variance lambda = 2 pi^2 B^2 SNR / (3 c^2) [1/m^2].
double ranging_weight(double snr_linear, double bandwidth_hz);

}  // namespace anchoropt::channel
