#include "anchoropt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <queue>

#include "anchoropt/error.hpp"
#include "anchoropt/random.hpp"

namespace anchoropt::solver {

using std::numbers::pi;
using fisher::InfoSummary;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::kEOpt:
      return "eopt";
    case Objective::kDOpt:
      return "dopt";
    case Objective::kAOpt:
      return "aopt";
  }
  return "?";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kEpsOptimal:
      return "EpsOptimal";
    case Status::kTimeLimit:
      return "TimeLimit";
    case Status::kInfeasible:
      return "Infeasible";
    case Status::kHeuristic:
      return "Heuristic";
  }
  return "?";
}

SelectionProblem::SelectionProblem(const Dictionary& dict, std::size_t K, Objective objective)
    : dict_(&dict),
      K_(K),
      objective_(objective),
      M_(dict.num_candidates()),
      N_(dict.num_targets()) {
  if (K < 2) throw DomainError("SelectionProblem: K must be >= 2 to localize in 2D");
  if (M_ == 0 || N_ == 0) throw DomainError("SelectionProblem: empty dictionary");
  lam_.resize(M_ * N_);
  lc_.resize(M_ * N_);
  ls_.resize(M_ * N_);
  for (std::size_t n = 0; n < N_; ++n) {
    for (std::size_t m = 0; m < M_; ++m) {
      const double l = dict.lambda(m, n);
      const double a = 2.0 * dict.psi(m, n);
      lam_[n * M_ + m] = l;
      lc_[n * M_ + m] = l * std::cos(a);
      ls_[n * M_ + m] = l * std::sin(a);
    }
  }
}

void validate_selection(const SelectionProblem& problem, const Selection& selection) {
  if (selection.size() != problem.K()) {
    throw DomainError("selection: expected " + std::to_string(problem.K()) + " indices, got " +
                      std::to_string(selection.size()));
  }
  Selection sorted = selection;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("selection: duplicate candidate index");
  }
  if (!sorted.empty() && sorted.back() >= problem.M()) {
    throw DomainError("selection: candidate index " + std::to_string(sorted.back()) +
                      " out of range");
  }
}

double target_score(Objective objective, const InfoSummary& s) {
  const bool singular = fisher::is_singular(s);
  switch (objective) {
    case Objective::kEOpt:
      return singular ? 0.0 : s.S - s.r;
    case Objective::kDOpt:
      return singular ? 0.0 : std::sqrt((s.S - s.r) * (s.S + s.r));
    case Objective::kAOpt:
      return singular ? kInf : 4.0 * s.S / ((s.S - s.r) * (s.S + s.r));
  }
  return 0.0;
}

double utility(Objective objective, double raw_value) {
  return objective == Objective::kAOpt ? -raw_value : raw_value;
}

double objective_value(Objective objective, double raw_value) {
  switch (objective) {
    case Objective::kEOpt:
      return raw_value > 0 ? 2.0 / raw_value : kInf;
    case Objective::kDOpt:
      return raw_value > 0 ? 4.0 / (raw_value * raw_value) : kInf;
    case Objective::kAOpt:
      return raw_value;
  }
  return kInf;
}

namespace {

InfoSummary summary_of(const SelectionProblem& p, const std::size_t* idx, std::size_t count,
                       std::size_t n) {
  const double* lam = p.lambda_row(n);
  const double* lc = p.cos_row(n);
  const double* ls = p.sin_row(n);
  InfoSummary s;
  for (std::size_t i = 0; i < count; ++i) {
    s.S += lam[idx[i]];
    s.u += lc[idx[i]];
    s.v += ls[idx[i]];
  }
  s.r = std::hypot(s.u, s.v);
  return s;
}

// Worst-target score of an index set of any size.
struct Score {
  double utility;
  double coverage;  // min_n S_n, tie-breaker for partial sets
};

Score score_of(const SelectionProblem& p, const std::size_t* idx, std::size_t count) {
  Score sc{kInf, kInf};
  for (std::size_t n = 0; n < p.N(); ++n) {
    const InfoSummary s = summary_of(p, idx, count, n);
    sc.utility = std::min(sc.utility, utility(p.objective(), target_score(p.objective(), s)));
    sc.coverage = std::min(sc.coverage, s.S);
  }
  return sc;
}

bool better(const Score& a, const Score& b) {
  if (a.utility != b.utility) return a.utility > b.utility;
  return a.coverage > b.coverage;
}

}  // namespace

Evaluation eval_selection(const SelectionProblem& problem, const Selection& selection) {
  validate_selection(problem, selection);
  Selection sorted = selection;
  std::sort(sorted.begin(), sorted.end());
  Evaluation ev;
  ev.per_target.reserve(problem.N());
  double worst = kInf;
  for (std::size_t n = 0; n < problem.N(); ++n) {
    const InfoSummary s = summary_of(problem, sorted.data(), sorted.size(), n);
    ev.per_target.push_back(s);
    ev.singular = ev.singular || fisher::is_singular(s);
    const double u = utility(problem.objective(), target_score(problem.objective(), s));
    if (u < worst) {
      worst = u;
      ev.critical_target = n;
    }
  }
  ev.raw_value = utility(problem.objective(), worst);
  return ev;
}

// ---------------------------------------------------------------------------
// Bounds

namespace {

// Evaluates support-function bounds for one node at a time. Keeps scratch
// buffers so branch-and-bound does not allocate per node.
class BoundEngine {
 public:
  BoundEngine(const SelectionProblem& p, int grid, bool refine)
      : p_(p), grid_(std::max(grid, 1)), refine_(refine) {
    cos_.resize(grid_);
    sin_.resize(grid_);
    for (int g = 0; g < grid_; ++g) {
      const double t = 2.0 * pi * g / grid_;
      cos_[g] = std::cos(t);
      sin_[g] = std::sin(t);
    }
    values_.resize(grid_);
    scratch_.reserve(p.M());
  }

  // `ones` fixed to one; `free` are undecided. Precondition: the node is
  // feasible and has more than one completion.
  BoundResult bound(const std::vector<std::size_t>& ones, const std::vector<std::size_t>& free,
                    double threshold, std::size_t hint) {
    const std::size_t k = p_.K() - ones.size();
    BoundResult best;
    best.value = kInf;

    order_.clear();
    order_.push_back(hint < p_.N() ? hint : 0);
    for (std::size_t n = 0; n < p_.N(); ++n)
      if (n != order_[0]) order_.push_back(n);

    for (std::size_t n : order_) {
      // Coverage cap: S - r <= S and sqrt(S^2 - r^2) <= S.
      const double coverage = edge_sum(n, 0.0, 0.0, 0.0, ones, free, k);
      if (coverage >= best.value) continue;
      if (coverage <= threshold) {
        best = {coverage, false, false, n, 0.0};
        return best;
      }

      int arg = 0;
      double target_min = kInf;
      for (int g = 0; g < grid_; ++g) values_[g] = edge_sum(n, cos_[g], sin_[g], -1.0, ones, free, k);
      for (int g = 0; g < grid_; ++g) {
        const double v = objective_at(n, g, ones, free, k);
        if (v < target_min) {
          target_min = v;
          arg = g;
        }
      }
      double theta = 2.0 * pi * arg / grid_;

      const double slack = coverage * pi / grid_;
      if (refine_ && target_min - slack < best.value) {
        refine(n, theta, target_min, ones, free, k);
      }
      if (target_min < best.value) best = {target_min, false, false, n, theta};
      if (best.value <= threshold) return best;
    }
    return best;
  }

 private:
  // sum_{ones} c_m + top-k_{free} c_m with c_m = lambda + sign * (lc cos + ls sin).
  double edge_sum(std::size_t n, double c, double s, double sign,
                  const std::vector<std::size_t>& ones, const std::vector<std::size_t>& free,
                  std::size_t k) {
    const double* lam = p_.lambda_row(n);
    const double* lc = p_.cos_row(n);
    const double* ls = p_.sin_row(n);
    auto coef = [&](std::size_t m) { return lam[m] + sign * (lc[m] * c + ls[m] * s); };
    double total = 0.0;
    for (std::size_t m : ones) total += coef(m);
    if (k == 0) return total;
    if (k <= kSmallK) {
      double top[kSmallK];
      std::size_t filled = 0;
      for (std::size_t m : free) {
        const double v = coef(m);
        if (filled < k) {
          std::size_t i = filled++;
          while (i > 0 && top[i - 1] < v) {
            top[i] = top[i - 1];
            --i;
          }
          top[i] = v;
        } else if (v > top[k - 1]) {
          std::size_t i = k - 1;
          while (i > 0 && top[i - 1] < v) {
            top[i] = top[i - 1];
            --i;
          }
          top[i] = v;
        }
      }
      for (std::size_t i = 0; i < filled; ++i) total += top[i];
      return total;
    }
    scratch_.clear();
    for (std::size_t m : free) scratch_.push_back(coef(m));
    if (k < scratch_.size()) {
      std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k),
                       scratch_.end(), std::greater<>());
    }
    for (std::size_t i = 0; i < std::min(k, scratch_.size()); ++i) total += scratch_[i];
    return total;
  }

  // Objective bound at grid angle g, given values_ = minus-edge sums for target n.
  double objective_at(std::size_t n, int g, const std::vector<std::size_t>& ones,
                      const std::vector<std::size_t>& free, std::size_t k) {
    const double minus = std::max(0.0, values_[g]);
    if (p_.objective() == Objective::kEOpt) return minus;
    double plus;
    if (grid_ % 2 == 0) {
      plus = values_[(g + grid_ / 2) % grid_];
    } else {
      plus = edge_sum(n, cos_[g], sin_[g], 1.0, ones, free, k);
    }
    return std::sqrt(minus * std::max(0.0, plus));
  }

  double objective_at_angle(std::size_t n, double theta, const std::vector<std::size_t>& ones,
                            const std::vector<std::size_t>& free, std::size_t k) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double minus = std::max(0.0, edge_sum(n, c, s, -1.0, ones, free, k));
    if (p_.objective() == Objective::kEOpt) return minus;
    const double plus = std::max(0.0, edge_sum(n, c, s, 1.0, ones, free, k));
    return std::sqrt(minus * plus);
  }

  // Golden-section search around the best grid angle. Every evaluated angle is
  // a valid bound, so the smallest value seen is kept.
  void refine(std::size_t n, double& theta, double& value, const std::vector<std::size_t>& ones,
              const std::vector<std::size_t>& free, std::size_t k) {
    constexpr double kInvPhi = 0.6180339887498949;
    constexpr int kIterations = 24;
    const double width = 2.0 * pi / grid_;
    double a = theta - width, b = theta + width;
    double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
    double f1 = objective_at_angle(n, x1, ones, free, k);
    double f2 = objective_at_angle(n, x2, ones, free, k);
    auto keep = [&](double x, double f) {
      if (f < value) {
        value = f;
        theta = x;
      }
    };
    keep(x1, f1);
    keep(x2, f2);
    for (int it = 0; it < kIterations; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kInvPhi * (b - a);
        f1 = objective_at_angle(n, x1, ones, free, k);
        keep(x1, f1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kInvPhi * (b - a);
        f2 = objective_at_angle(n, x2, ones, free, k);
        keep(x2, f2);
      }
    }
  }

  static constexpr std::size_t kSmallK = 8;

  const SelectionProblem& p_;
  int grid_;
  bool refine_;
  std::vector<double> cos_, sin_, values_, scratch_;
  std::vector<std::size_t> order_;
};

void require_bounded_objective(const SelectionProblem& p) {
  if (p.objective() == Objective::kAOpt) {
    throw DomainError("branch-and-bound supports the E- and D-optimal objectives only");
  }
}

// Undecided candidates of a node; throws on malformed fixings.
std::vector<std::size_t> free_candidates(const SelectionProblem& p, const Node& node) {
  std::vector<signed char> state(p.M(), 0);
  for (std::size_t m : node.fixed_one) {
    if (m >= p.M() || state[m] != 0) throw DomainError("node: invalid or repeated fixed index");
    state[m] = 1;
  }
  for (std::size_t m : node.fixed_zero) {
    if (m >= p.M() || state[m] != 0) throw DomainError("node: invalid or repeated fixed index");
    state[m] = -1;
  }
  std::vector<std::size_t> free;
  for (std::size_t m = 0; m < p.M(); ++m)
    if (state[m] == 0) free.push_back(m);
  return free;
}

}  // namespace

BoundResult node_upper_bound(const SelectionProblem& problem, const Node& node,
                             const BoundOptions& options) {
  require_bounded_objective(problem);
  const std::vector<std::size_t> free = free_candidates(problem, node);
  BoundResult res;
  if (node.fixed_one.size() > problem.K() ||
      node.fixed_one.size() + free.size() < problem.K()) {
    res.infeasible = true;
    res.value = -kInf;
    return res;
  }
  const std::size_t k = problem.K() - node.fixed_one.size();
  if (k == 0 || k == free.size()) {
    Selection sel = node.fixed_one;
    if (k > 0) sel.insert(sel.end(), free.begin(), free.end());
    const Evaluation ev = eval_selection(problem, sel);
    res.value = ev.raw_value;
    res.exact = true;
    res.critical_target = ev.critical_target;
    return res;
  }
  BoundEngine engine(problem, options.angle_grid_size, options.refine_angles);
  return engine.bound(node.fixed_one, free, options.prune_threshold, 0);
}

// ---------------------------------------------------------------------------
// Incumbents

Selection greedy_incumbent(const SelectionProblem& problem, const Node& node) {
  const std::vector<std::size_t> free = free_candidates(problem, node);
  if (node.fixed_one.size() > problem.K() ||
      node.fixed_one.size() + free.size() < problem.K()) {
    throw DomainError("greedy_incumbent: node admits no completion");
  }
  Selection sel = node.fixed_one;
  std::vector<char> used(problem.M(), 0);
  for (std::size_t m : sel) used[m] = 1;

  while (sel.size() < problem.K()) {
    std::size_t best_m = problem.M();
    Score best{-kInf, -kInf};
    sel.push_back(0);
    for (std::size_t m : free) {
      if (used[m]) continue;
      sel.back() = m;
      const Score s = score_of(problem, sel.data(), sel.size());
      if (best_m == problem.M() || better(s, best)) {
        best = s;
        best_m = m;
      }
    }
    sel.back() = best_m;
    used[best_m] = 1;
  }

  // Best-improvement 1-swap over the non-fixed positions.
  const std::size_t first_free = node.fixed_one.size();
  Score current = score_of(problem, sel.data(), sel.size());
  for (;;) {
    Score best = current;
    std::size_t best_pos = sel.size(), best_m = problem.M();
    for (std::size_t pos = first_free; pos < sel.size(); ++pos) {
      const std::size_t old = sel[pos];
      for (std::size_t m : free) {
        if (used[m]) continue;
        sel[pos] = m;
        const Score s = score_of(problem, sel.data(), sel.size());
        if (s.utility > best.utility + 1e-12 * std::abs(best.utility)) {
          best = s;
          best_pos = pos;
          best_m = m;
        }
      }
      sel[pos] = old;
    }
    if (best_pos == sel.size()) break;
    used[sel[best_pos]] = 0;
    used[best_m] = 1;
    sel[best_pos] = best_m;
    current = best;
  }
  std::sort(sel.begin(), sel.end());
  return sel;
}

namespace {

SolveReport make_report(const SelectionProblem& p, Selection sel, Status status, double bound,
                        std::uint64_t nodes, Clock::time_point start) {
  SolveReport r;
  const Evaluation ev = eval_selection(p, sel);
  r.selection = std::move(sel);
  std::sort(r.selection.begin(), r.selection.end());
  r.raw_value = ev.raw_value;
  r.singular = ev.singular;
  r.objective_value = objective_value(p.objective(), ev.raw_value);
  r.status = status;
  r.nodes_explored = nodes;
  if (std::isnan(bound)) {
    r.bound = bound;
    r.gap = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.bound = std::max(bound, r.raw_value);
    r.gap = (r.bound - r.raw_value) / std::max(r.bound, kGapDenominatorGuard);
  }
  r.runtime_ms = elapsed_ms(start);
  return r;
}

SolveReport infeasible_report(const SelectionProblem& p, Clock::time_point start) {
  SolveReport r;
  r.status = Status::kInfeasible;
  r.raw_value = 0.0;
  r.objective_value = objective_value(p.objective(), 0.0);
  r.bound = -kInf;
  r.gap = std::numeric_limits<double>::quiet_NaN();
  r.runtime_ms = elapsed_ms(start);
  return r;
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / i;
  return std::round(c);
}

}  // namespace

SolveReport exhaustive_oracle(const SelectionProblem& problem, double budget) {
  const auto start = Clock::now();
  const std::size_t M = problem.M(), N = problem.N(), K = problem.K();
  if (K > M) return infeasible_report(problem, start);
  const double count = binomial(M, K);
  if (count > budget) {
    throw BudgetError("exhaustive_oracle: C(" + std::to_string(M) + ", " + std::to_string(K) +
                      ") = " + std::to_string(count) + " subsets exceeds the budget of " +
                      std::to_string(budget));
  }

  // Running per-target sums for each depth; summation order matches eval_selection.
  std::vector<double> S((K + 1) * N, 0.0), U((K + 1) * N, 0.0), V((K + 1) * N, 0.0);
  std::vector<std::size_t> idx(K);
  Selection best;
  double best_u = -kInf;
  std::uint64_t visited = 0;

  auto descend = [&](auto&& self, std::size_t depth, std::size_t from) -> void {
    for (std::size_t m = from; m + (K - depth) <= M; ++m) {
      idx[depth] = m;
      for (std::size_t n = 0; n < N; ++n) {
        S[(depth + 1) * N + n] = S[depth * N + n] + problem.lambda(m, n);
        U[(depth + 1) * N + n] = U[depth * N + n] + problem.lambda_cos(m, n);
        V[(depth + 1) * N + n] = V[depth * N + n] + problem.lambda_sin(m, n);
      }
      if (depth + 1 == K) {
        ++visited;
        double worst = kInf;
        for (std::size_t n = 0; n < N && worst > best_u; ++n) {
          const std::size_t at = K * N + n;
          const InfoSummary s{S[at], U[at], V[at], std::hypot(U[at], V[at])};
          worst = std::min(worst, utility(problem.objective(), target_score(problem.objective(), s)));
        }
        if (worst > best_u) {
          best_u = worst;
          best.assign(idx.begin(), idx.end());
        }
      } else {
        self(self, depth + 1, m + 1);
      }
    }
  };
  descend(descend, 0, 0);

  SolveReport r = make_report(problem, best, Status::kEpsOptimal, -kInf, visited, start);
  r.bound = r.raw_value;
  r.gap = 0.0;
  return r;
}

SolveReport rand_minimax(const SelectionProblem& problem, std::size_t trials, std::uint64_t seed) {
  const auto start = Clock::now();
  if (trials < 1) throw DomainError("rand_minimax: trials must be >= 1");
  const std::size_t M = problem.M(), K = problem.K();
  if (K > M) return infeasible_report(problem, start);
  Rng rng(seed);
  std::vector<std::size_t> perm(M);
  for (std::size_t i = 0; i < M; ++i) perm[i] = i;
  Selection best;
  double best_u = -kInf;
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < K; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(M - i));
      std::swap(perm[i], perm[j]);
    }
    Selection draw(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(K));
    std::sort(draw.begin(), draw.end());
    const double u = score_of(problem, draw.data(), K).utility;
    if (best.empty() || u > best_u) {
      best_u = u;
      best = std::move(draw);
    }
  }
  return make_report(problem, best, Status::kHeuristic, std::numeric_limits<double>::quiet_NaN(),
                     trials, start);
}

// ---------------------------------------------------------------------------
// Branch-and-bound

namespace {

// Nodes share their decision prefix through a parent chain.
struct Decision {
  std::shared_ptr<const Decision> parent;
  std::uint32_t index;
  bool value;
};

struct OpenNode {
  double bound;
  std::uint64_t seq;
  std::shared_ptr<const Decision> path;
  std::uint32_t num_ones;
  std::uint32_t num_zeros;
  std::uint32_t critical_target;
};

struct OpenNodeOrder {
  bool operator()(const OpenNode& a, const OpenNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // max-heap on bound
    return a.seq > b.seq;                              // then oldest first
  }
};

// Enumerates every completion of `ones` by k members of `free` and returns the
// best raw value above `floor` (or -inf), writing the selection to `out`.
class CompletionSearch {
 public:
  explicit CompletionSearch(const SelectionProblem& p) : p_(p) {}

  double run(const std::vector<std::size_t>& ones, const std::vector<std::size_t>& free,
             std::size_t k, double floor, std::size_t first_target, Selection& out) {
    const std::size_t N = p_.N();
    k_ = k;
    best_ = floor;
    found_ = false;
    order_.clear();
    order_.push_back(first_target);
    for (std::size_t n = 0; n < N; ++n)
      if (n != first_target) order_.push_back(n);
    sums_.assign(3 * N * (k + 1), 0.0);
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t m : ones) {
        sums_[n] += p_.lambda(m, n);
        sums_[N + n] += p_.lambda_cos(m, n);
        sums_[2 * N + n] += p_.lambda_sin(m, n);
      }
    }
    pick_.assign(k, 0);
    ones_ = &ones;
    free_ = &free;
    descend(0, 0);
    if (!found_) return -kInf;
    out = ones;
    for (std::size_t i : best_pick_) out.push_back(free[i]);
    std::sort(out.begin(), out.end());
    return best_;
  }

 private:
  void descend(std::size_t depth, std::size_t from) {
    const std::size_t N = p_.N();
    const double* S = sums_.data() + 3 * N * depth;
    double* T = sums_.data() + 3 * N * (depth + 1);
    const std::vector<std::size_t>& free = *free_;
    for (std::size_t i = from; i + (k_ - depth) <= free.size(); ++i) {
      const std::size_t m = free[i];
      pick_[depth] = i;
      for (std::size_t n = 0; n < N; ++n) {
        T[n] = S[n] + p_.lambda(m, n);
        T[N + n] = S[N + n] + p_.lambda_cos(m, n);
        T[2 * N + n] = S[2 * N + n] + p_.lambda_sin(m, n);
      }
      if (depth + 1 < k_) {
        descend(depth + 1, i + 1);
        continue;
      }
      double worst = kInf;
      for (std::size_t n : order_) {
        const InfoSummary s{T[n], T[N + n], T[2 * N + n], std::hypot(T[N + n], T[2 * N + n])};
        worst = std::min(worst, target_score(p_.objective(), s));
        if (worst <= best_) break;
      }
      if (worst > best_) {
        best_ = worst;
        best_pick_ = pick_;
        found_ = true;
      }
    }
  }

  const SelectionProblem& p_;
  std::size_t k_ = 0;
  double best_ = 0.0;
  bool found_ = false;
  std::vector<std::size_t> order_, pick_, best_pick_;
  std::vector<double> sums_;
  const std::vector<std::size_t>* ones_ = nullptr;
  const std::vector<std::size_t>* free_ = nullptr;
};

// Nodes with at most this many completions are solved by enumeration.
constexpr double kCompletionBudget = 20000.0;

}  // namespace

SolveReport branch_and_bound(const SelectionProblem& problem, const BnbConfig& config) {
  require_bounded_objective(problem);
  const auto start = Clock::now();
  const std::size_t M = problem.M(), K = problem.K();
  if (K > M) return infeasible_report(problem, start);

  Selection incumbent = greedy_incumbent(problem, Node{});
  double inc = eval_selection(problem, incumbent).raw_value;

  BoundEngine engine(problem, config.angle_grid_size, config.refine_angles);
  std::vector<std::size_t> all(M);
  for (std::size_t m = 0; m < M; ++m) all[m] = m;
  const double root_bound =
      K == M ? inc : engine.bound({}, all, -kInf, 0).value;

  std::vector<TracePoint> trace;
  auto finish = [&](Status status, double bound, std::uint64_t nodes) {
    SolveReport r = make_report(problem, incumbent, status, bound, nodes, start);
    r.trace = std::move(trace);
    return r;
  };

  if (K == M) return finish(Status::kEpsOptimal, inc, 0);
  if (config.time_limit_ms <= 0) return finish(Status::kTimeLimit, root_bound, 0);

  std::priority_queue<OpenNode, std::vector<OpenNode>, OpenNodeOrder> open;
  std::uint64_t seq = 0;
  open.push({root_bound, seq++, nullptr, 0, 0, 0});

  std::vector<signed char> state(M, 0);
  std::vector<std::size_t> ones, free, completion;
  std::uint64_t nodes = 0;
  CompletionSearch completions(problem);

  auto try_incumbent = [&](const Selection& sel) {
    const double v = eval_selection(problem, sel).raw_value;
    if (v > inc) {
      inc = v;
      incumbent = sel;
    }
  };

  while (!open.empty()) {
    const double global_bound = open.top().bound;
    if (config.record_trace) trace.push_back({std::max(global_bound, inc), inc});
    if (global_bound - inc <= config.eps_gap * std::max(global_bound, kGapDenominatorGuard)) {
      return finish(Status::kEpsOptimal, global_bound, nodes);
    }
    if (nodes >= config.max_nodes || elapsed_ms(start) >= config.time_limit_ms) {
      return finish(Status::kTimeLimit, global_bound, nodes);
    }
    const OpenNode node = open.top();
    open.pop();
    ++nodes;
    if (node.bound <= inc) continue;

    // Materialize the node's fixings.
    for (const Decision* d = node.path.get(); d; d = d->parent.get()) {
      state[d->index] = d->value ? 1 : -1;
    }
    ones.clear();
    free.clear();
    for (std::size_t m = 0; m < M; ++m) {
      if (state[m] == 1) ones.push_back(m);
      else if (state[m] == 0) free.push_back(m);
    }
    for (const Decision* d = node.path.get(); d; d = d->parent.get()) state[d->index] = 0;

    // Branch on the free candidate with the largest weight for the critical target.
    const double* lam = problem.lambda_row(node.critical_target);
    std::size_t branch = free.front();
    for (std::size_t m : free)
      if (lam[m] > lam[branch]) branch = m;

    for (bool value : {true, false}) {
      const std::uint32_t n_ones = node.num_ones + (value ? 1 : 0);
      const std::uint32_t n_zeros = node.num_zeros + (value ? 0 : 1);
      const std::size_t n_free = free.size() - 1;
      if (n_ones > K || n_ones + n_free < K) continue;

      std::vector<std::size_t> child_ones = ones;
      std::vector<std::size_t> child_free;
      child_free.reserve(n_free);
      for (std::size_t m : free)
        if (m != branch) child_free.push_back(m);
      if (value) {
        child_ones.insert(std::upper_bound(child_ones.begin(), child_ones.end(), branch), branch);
      }
      const std::size_t k = K - n_ones;
      if (binomial(n_free, k) <= kCompletionBudget) {
        const double v =
            completions.run(child_ones, child_free, k, inc, node.critical_target, completion);
        if (v > inc) try_incumbent(completion);
        continue;
      }

      BoundResult b = engine.bound(child_ones, child_free, inc, node.critical_target);
      const double bound = std::min(b.value, node.bound);
      if (bound <= inc) continue;

      // Cheap completion: fixed ones plus the best coefficients at the critical angle.
      {
        const std::size_t n = b.critical_target;
        const double c = std::cos(b.critical_theta), s = std::sin(b.critical_theta);
        const double* l = problem.lambda_row(n);
        const double* lc = problem.cos_row(n);
        const double* ls = problem.sin_row(n);
        completion = child_free;
        auto coef = [&](std::size_t m) { return l[m] - (lc[m] * c + ls[m] * s); };
        std::partial_sort(completion.begin(), completion.begin() + static_cast<std::ptrdiff_t>(k),
                          completion.end(), [&](std::size_t a, std::size_t bb) {
                            const double ca = coef(a), cb = coef(bb);
                            return ca != cb ? ca > cb : a < bb;
                          });
        completion.resize(k);
        completion.insert(completion.end(), child_ones.begin(), child_ones.end());
        std::sort(completion.begin(), completion.end());
        try_incumbent(completion);
      }
      if (bound <= inc) continue;

      auto path = std::make_shared<const Decision>(
          Decision{node.path, static_cast<std::uint32_t>(branch), value});
      open.push({bound, seq++, std::move(path), n_ones, n_zeros,
                 static_cast<std::uint32_t>(b.critical_target)});
    }
  }
  return finish(Status::kEpsOptimal, inc, nodes);
}

}  // namespace anchoropt::solver
