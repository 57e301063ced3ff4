#include "anchoropt/delayfim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "anchoropt/error.hpp"

namespace anchoropt::delayfim {

using std::numbers::pi;

void validate(const MultipathSpec& spec) {
  if (spec.gains.empty()) throw DomainError("multipath: at least one path required");
  if (spec.gains.size() != spec.delays_s.size()) {
    throw DomainError("multipath: gains and delays differ in length");
  }
  if (!(spec.bandwidth_hz > 0)) throw DomainError("multipath: bandwidth must be > 0");
  if (!(spec.noise_psd > 0)) throw DomainError("multipath: noise PSD must be > 0");
  if (!std::is_sorted(spec.delays_s.begin(), spec.delays_s.end())) {
    throw DomainError("multipath: delays must be sorted ascending (first-arriving path first)");
  }
}

double overlap_kernel(double bandwidth_hz, double delta_s) {
  const double B = bandwidth_hz;
  const double x = pi * B * delta_s;
  // kernel = pi^2 B^2 * g(x), g(x) = (x^2 sin x + 2x cos x - 2 sin x) / x^3.
  double g;
  if (std::abs(x) < 0.1) {
    const double x2 = x * x;
    const double x4 = x2 * x2;
    g = 1.0 / 3.0 - x2 / 10.0 + x4 / 168.0 - x4 * x2 / 6480.0 + x4 * x4 / 443520.0;
  } else {
    const double s = std::sin(x);
    const double c = std::cos(x);
    g = (x * x * s + 2.0 * x * c - 2.0 * s) / (x * x * x);
  }
  return pi * pi * B * B * g;
}

DelayFim fim_tau(const MultipathSpec& spec) {
  validate(spec);
  const auto L = static_cast<Eigen::Index>(spec.gains.size());
  DelayFim out{Eigen::MatrixXd(L, L)};
  const double scale = 2.0 / spec.noise_psd;
  for (Eigen::Index i = 0; i < L; ++i) {
    out.matrix(i, i) = scale * std::norm(spec.gains[i]) * overlap_kernel(spec.bandwidth_hz, 0.0);
    for (Eigen::Index j = i + 1; j < L; ++j) {
      const double coupling = std::real(std::conj(spec.gains[i]) * spec.gains[j]);
      const double delta = spec.delays_s[i] - spec.delays_s[j];
      const double v = scale * coupling * overlap_kernel(spec.bandwidth_hz, delta);
      out.matrix(i, j) = v;
      out.matrix(j, i) = v;
    }
  }
  return out;
}

double efim_first_path(const DelayFim& fim) {
  const Eigen::MatrixXd& I = fim.matrix;
  const Eigen::Index L = I.rows();
  if (L == 0 || I.cols() != L) throw DomainError("efim_first_path: FIM must be square and nonempty");
  if (L == 1) return I(0, 0);

  const Eigen::MatrixXd nuisance = I.bottomRightCorner(L - 1, L - 1);
  const Eigen::VectorXd cross = I.block(1, 0, L - 1, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(nuisance, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(hi > 0) || lo <= 1e-12 * hi) {
    std::ostringstream msg;
    msg << "efim_first_path: nuisance block I[2:L, 2:L] is singular (eigenvalues in [" << lo
        << ", " << hi << "])";
    throw SingularError(msg.str());
  }
  const double loss = cross.dot(nuisance.ldlt().solve(cross));
  return std::max(0.0, I(0, 0) - loss);
}

std::vector<OverlapPoint> overlap_loss_curve(const MultipathSpec& two_path,
                                             const std::vector<double>& delta_grid_s) {
  if (two_path.gains.size() != 2) throw DomainError("overlap_loss_curve: two-path template required");
  std::vector<OverlapPoint> out;
  out.reserve(delta_grid_s.size());
  for (double delta : delta_grid_s) {
    if (!(delta >= 0)) throw DomainError("overlap_loss_curve: overlap must be >= 0");
    MultipathSpec spec = two_path;
    spec.delays_s = {0.0, delta};
    const DelayFim fim = fim_tau(spec);
    const double efim = efim_first_path(fim);
    const double loss = std::clamp(1.0 - efim / fim.matrix(0, 0), 0.0, 1.0);
    out.push_back({delta, loss});
  }
  return out;
}

}  // namespace anchoropt::delayfim
