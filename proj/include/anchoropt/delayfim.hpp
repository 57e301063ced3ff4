#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace anchoropt::delayfim {

/// Multipath received-signal parameters under a flat PSD of width B.
/// Path 0 is the first-arriving (diffraction) component.
struct MultipathSpec {
  std::vector<std::complex<double>> gains;
  std::vector<double> delays_s;
  double bandwidth_hz = 0.0;
  double noise_psd = 1.0;
};

struct DelayFim {
  Eigen::MatrixXd matrix;
};

void validate(const MultipathSpec& spec);

/// Off-diagonal kernel (2/N0 omitted): int (2 pi f)^2 |S(f)|^2 e^{j 2 pi f delta} df,
/// which is real and even in delta. Returns pi^2 B^2 / 3 at delta = 0.
double overlap_kernel(double bandwidth_hz, double delta_s);

/// L x L Fisher information of the path delays.
DelayFim fim_tau(const MultipathSpec& spec);

/// Equivalent Fisher information of the first path with the others as
/// nuisance parameters (Schur complement). Throws SingularError when the
/// nuisance block is not invertible.
double efim_first_path(const DelayFim& fim);

struct OverlapPoint {
  double delta_s;
  double loss_fraction;  // 1 - EFIM / I_11
};

/// Information lost by the first path as the second path moves delta later.
/// `two_path` supplies gains, B and N0; its delays are ignored.
std::vector<OverlapPoint> overlap_loss_curve(const MultipathSpec& two_path,
                                             const std::vector<double>& delta_grid_s);

}  // namespace anchoropt::delayfim
