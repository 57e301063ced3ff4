#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "anchoropt/dictionary.hpp"
#include "anchoropt/fisher.hpp"

namespace anchoropt::solver {

enum class Objective { kEOpt, kDOpt, kAOpt };

enum class Status {
  kEpsOptimal,  // gap certified <= eps_gap
  kTimeLimit,   // time or node budget ran out; best incumbent returned
  kInfeasible,  // no selection of K candidates exists
  kHeuristic,   // no certificate (random baselines)
};

std::string_view to_string(Objective o);
std::string_view to_string(Status s);

/// Choose exactly K of the dictionary's M candidates to maximize the worst
/// target's E-value min_n (S_n - r_n) or D-value min_n sqrt(S_n^2 - r_n^2),
/// or to minimize the worst A-value max_n 4 S_n / (S_n^2 - r_n^2).
///
/// The problem keeps per-entry lambda * cos(2 psi) and lambda * sin(2 psi) so
/// evaluations never call trigonometric functions.
class SelectionProblem {
 public:
  /// Throws DomainError unless 2 <= K. K > M is allowed and solves as infeasible.
  SelectionProblem(const Dictionary& dict, std::size_t K, Objective objective);

  const Dictionary& dictionary() const { return *dict_; }
  std::size_t K() const { return K_; }
  Objective objective() const { return objective_; }
  std::size_t M() const { return M_; }
  std::size_t N() const { return N_; }

  double lambda(std::size_t m, std::size_t n) const { return lam_[n * M_ + m]; }
  double lambda_cos(std::size_t m, std::size_t n) const { return lc_[n * M_ + m]; }
  double lambda_sin(std::size_t m, std::size_t n) const { return ls_[n * M_ + m]; }
  const double* lambda_row(std::size_t n) const { return lam_.data() + n * M_; }
  const double* cos_row(std::size_t n) const { return lc_.data() + n * M_; }
  const double* sin_row(std::size_t n) const { return ls_.data() + n * M_; }

 private:
  const Dictionary* dict_;
  std::size_t K_;
  Objective objective_;
  std::size_t M_;
  std::size_t N_;
  std::vector<double> lam_, lc_, ls_;
};

/// Candidate indices in ascending order.
using Selection = std::vector<std::size_t>;

/// Throws DomainError unless the selection has K distinct in-range indices.
void validate_selection(const SelectionProblem& problem, const Selection& selection);

struct Evaluation {
  std::vector<fisher::InfoSummary> per_target;
  double raw_value = 0.0;
  bool singular = false;             // some target has r_n >= S_n
  std::size_t critical_target = 0;   // target attaining the min (E, D) or max (A)
};

/// Per-objective score from one target's summary (E: S - r, D: sqrt(S^2 - r^2),
/// A: 4S / (S^2 - r^2)). Singular summaries score 0 (E, D) or +inf (A).
double target_score(Objective objective, const fisher::InfoSummary& s);

Evaluation eval_selection(const SelectionProblem& problem, const Selection& selection);

/// Larger is better for every objective (A scores are negated).
double utility(Objective objective, double raw_value);

/// Phi_E = 2 / gamma, Phi_D = 4 / tau^2, Phi_A = raw.
double objective_value(Objective objective, double raw_value);

/// Partial assignment of the binary selection variables.
struct Node {
  std::vector<std::size_t> fixed_one;
  std::vector<std::size_t> fixed_zero;
  double upper_bound = 0.0;
};

struct BoundOptions {
  int angle_grid_size = 64;
  bool refine_angles = true;
  /// Stop as soon as the bound drops to or below this value (node is pruned).
  double prune_threshold = -1.0;
};

struct BoundResult {
  double value = 0.0;
  bool infeasible = false;  // fewer than K candidates remain
  bool exact = false;       // node has a unique completion; value is its raw value
  std::size_t critical_target = 0;
  double critical_theta = 0.0;
};

/// Upper bound on raw_value over all completions of `node` (E and D only).
/// For each target n and angle theta, r_n >= u_n cos(theta) + v_n sin(theta), so
/// S_n - r_n <= sum_m x_m lambda_mn (1 - cos(2 psi_mn - theta)), whose maximum over
/// the cardinality-constrained box is a top-K coefficient sum.
BoundResult node_upper_bound(const SelectionProblem& problem, const Node& node,
                             const BoundOptions& options = {});

/// Fixed ones, then greedy additions, then best-improvement 1-swaps to a local optimum.
Selection greedy_incumbent(const SelectionProblem& problem, const Node& node);

struct TracePoint {
  double global_bound;
  double incumbent;
};

struct SolveReport {
  Selection selection;
  double raw_value = 0.0;
  double objective_value = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  std::uint64_t nodes_explored = 0;
  Status status = Status::kInfeasible;
  double runtime_ms = 0.0;
  bool singular = false;
  std::vector<TracePoint> trace;  // filled when BnbConfig::record_trace is set
};

inline constexpr double kGapDenominatorGuard = 1e-12;

/// Enumerates every K-subset. Throws BudgetError when C(M, K) > budget.
SolveReport exhaustive_oracle(const SelectionProblem& problem, double budget = 1e6);

/// Best of `trials` uniformly random K-subsets under the problem's objective.
SolveReport rand_minimax(const SelectionProblem& problem, std::size_t trials, std::uint64_t seed);

struct BnbConfig {
  double eps_gap = 1e-6;
  std::uint64_t max_nodes = 20'000'000;
  double time_limit_ms = 70'000.0;
  int angle_grid_size = 64;
  bool refine_angles = true;
  bool record_trace = false;
};

/// Best-bound-first branch-and-bound over the selection variables (E and D only).
SolveReport branch_and_bound(const SelectionProblem& problem, const BnbConfig& config = {});

}  // namespace anchoropt::solver
