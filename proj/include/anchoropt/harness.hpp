#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "anchoropt/dictionary.hpp"
#include "anchoropt/fisher.hpp"
#include "anchoropt/scene.hpp"
#include "anchoropt/solver.hpp"

namespace anchoropt::harness {

enum class Algo { kEOpt, kDOpt, kRandA, kRandD, kRandE, kExhaustive };

std::string_view to_string(Algo algo);
/// Accepts eopt, dopt, rand-a, rand-d, rand-e, exhaustive. Throws ValidationError.
Algo algo_from_string(std::string_view name);

/// Which per-target objective picks the worst target.
enum class Criterion { kA, kD, kE };

struct SolverSettings {
  solver::BnbConfig bnb{.eps_gap = 1e-3};
  std::size_t rand_trials = 10'000;
  double exhaustive_budget = 1e6;
};

/// Runs one algorithm on a dictionary. `seed` drives the random baselines only.
solver::SolveReport solve(const Dictionary& dict, std::size_t K, Algo algo, std::uint64_t seed,
                          const SolverSettings& settings = {});

struct WorstTarget {
  std::size_t index = 0;
  fisher::MetricTriple metrics{};
  bool singular = false;  // metrics are +inf
};

/// Target with the largest Phi under `criterion` (ties to the lowest index) and
/// its PEB/CER/MAD.
WorstTarget worst_target_metrics(const Dictionary& dict, const solver::Selection& selection,
                                 Criterion criterion);

struct TrialRecord {
  std::size_t trial_id = 0;
  std::string algo;
  double d_m = 0.0;
  std::size_t K = 0;
  std::uint64_t seed = 0;
  double peb_m = 0.0;  // A-worst target
  double cer_m = 0.0;  // D-worst target
  double mad_m = 0.0;  // E-worst target
  double raw_value = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  std::string status;
  std::uint64_t nodes = 0;
  double runtime_ms = 0.0;
  std::size_t worst_target_index = 0;  // E-critical target
  solver::Selection selection;
  std::string error;

  /// Error, infeasible or singular records carry no usable metrics.
  bool flagged() const;
};

/// Fills the solution fields of a record from a report.
void fill_record(TrialRecord& rec, const Dictionary& dict, const solver::SolveReport& report);

/// Draws the grid shift from `seed`, builds grid and dictionary at spacing d,
/// solves and extracts metrics. Solver failures produce an Error record.
TrialRecord run_trial(const Scene& scene, double d, std::size_t K, Algo algo, std::uint64_t seed,
                      const SolverSettings& settings = {});

struct ExperimentConfig {
  Scene scene;
  std::vector<double> d_list{5.0};
  std::vector<std::size_t> K_list{4};
  std::vector<Algo> algos{Algo::kEOpt, Algo::kDOpt, Algo::kRandA, Algo::kRandD, Algo::kRandE};
  std::size_t trials = 50;
  std::uint64_t base_seed = 20240601;
  std::size_t workers = 1;
  SolverSettings settings;
};

/// Parses {"scene": {...}, "experiment": {...}}; unknown keys are rejected.
ExperimentConfig load_experiment(std::string_view text);
ExperimentConfig load_experiment_file(const std::string& path);
nlohmann::json experiment_to_json(const ExperimentConfig& config);

/// Shift seed shared by every algorithm of one trial.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t d_index, std::size_t K_index,
                         std::size_t trial_index);
/// Random stream of one algorithm within a trial.
std::uint64_t algo_seed(std::uint64_t trial_seed, Algo algo);

/// Records in canonical order (d, K, trial, algo). `sink`, when given, receives
/// each record in that same order as soon as its prefix is complete.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config,
                                        const std::function<void(const TrialRecord&)>& sink = {});

void write_results_header(std::ostream& out);
void write_result_row(std::ostream& out, const TrialRecord& rec);
void write_timings_header(std::ostream& out);
void write_timing_row(std::ostream& out, const TrialRecord& rec);
/// Parses a results CSV written by write_result_row. Throws FormatError.
std::vector<TrialRecord> read_results_csv(std::istream& in);

struct BoxStats {
  bool empty = true;
  std::size_t count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  std::vector<double> outliers;
};

/// Type-7 quartiles; whiskers at the most extreme data within 1.5 IQR of the box.
BoxStats box_stats(std::vector<double> values);
/// Median by the same interpolation rule; NaN for an empty list.
double median(std::vector<double> values);

struct GroupStats {
  std::map<std::string, std::string> key;
  std::size_t records = 0;
  std::size_t flagged = 0;
  BoxStats peb, cer, mad;
};

/// Groups by any of algo, d, K, status (in the given order) and summarizes the
/// unflagged records' metrics.
std::vector<GroupStats> aggregate(const std::vector<TrialRecord>& records,
                                  const std::vector<std::string>& group_keys);
nlohmann::json aggregate_to_json(const std::vector<GroupStats>& groups);

}  // namespace anchoropt::harness
