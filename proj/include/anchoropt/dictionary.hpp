#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anchoropt/scene.hpp"

namespace anchoropt {

/// Ranging weights and information angles for every candidate-anchor/target
/// pair. Storage is target-major: entry (m, n) lives at n * M + m.
class Dictionary {
 public:
  Dictionary() = default;
  Dictionary(std::vector<Vec3> candidates, std::vector<Vec3> targets, std::vector<double> lambda,
             std::vector<double> psi, std::uint64_t scene_hash = 0);

  std::size_t num_candidates() const { return candidates_.size(); }
  std::size_t num_targets() const { return targets_.size(); }

  double lambda(std::size_t m, std::size_t n) const { return lambda_[n * num_candidates() + m]; }
  double psi(std::size_t m, std::size_t n) const { return psi_[n * num_candidates() + m]; }

  /// Contiguous row of all candidates for target n.
  const double* lambda_row(std::size_t n) const { return lambda_.data() + n * num_candidates(); }
  const double* psi_row(std::size_t n) const { return psi_.data() + n * num_candidates(); }

  const std::vector<Vec3>& candidates() const { return candidates_; }
  const std::vector<Vec3>& targets() const { return targets_; }
  const std::vector<double>& lambda_data() const { return lambda_; }
  const std::vector<double>& psi_data() const { return psi_; }
  std::uint64_t scene_hash() const { return scene_hash_; }

  friend bool operator==(const Dictionary&, const Dictionary&) = default;

 private:
  std::vector<Vec3> candidates_;
  std::vector<Vec3> targets_;
  std::vector<double> lambda_;
  std::vector<double> psi_;
  std::uint64_t scene_hash_ = 0;
};

/// lambda via geometry -> nu -> SNR -> ranging weight; psi via the information angle.
Dictionary build_dictionary(const Scene& scene, const std::vector<Vec3>& candidates);

inline constexpr std::uint32_t kDictionaryFormatVersion = 1;

void export_dictionary(const Dictionary& dict, const std::string& path);
Dictionary import_dictionary(const std::string& path);

/// Inspection dump: m,n,lambda,psi_rad.
void export_dictionary_csv(const Dictionary& dict, const std::string& path);

}  // namespace anchoropt
