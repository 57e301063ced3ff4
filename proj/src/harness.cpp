#include "anchoropt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "anchoropt/error.hpp"
#include "anchoropt/random.hpp"

namespace anchoropt::harness {

using nlohmann::json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view to_string(Algo algo) {
  switch (algo) {
    case Algo::kEOpt:
      return "eopt";
    case Algo::kDOpt:
      return "dopt";
    case Algo::kRandA:
      return "rand-a";
    case Algo::kRandD:
      return "rand-d";
    case Algo::kRandE:
      return "rand-e";
    case Algo::kExhaustive:
      return "exhaustive";
  }
  return "?";
}

Algo algo_from_string(std::string_view name) {
  for (Algo a : {Algo::kEOpt, Algo::kDOpt, Algo::kRandA, Algo::kRandD, Algo::kRandE,
                 Algo::kExhaustive}) {
    if (to_string(a) == name) return a;
  }
  throw ValidationError("unknown algorithm '" + std::string(name) +
                        "' (expected eopt, dopt, rand-a, rand-d, rand-e or exhaustive)");
}

solver::SolveReport solve(const Dictionary& dict, std::size_t K, Algo algo, std::uint64_t seed,
                          const SolverSettings& settings) {
  using solver::Objective;
  switch (algo) {
    case Algo::kEOpt:
      return solver::branch_and_bound(solver::SelectionProblem(dict, K, Objective::kEOpt),
                                      settings.bnb);
    case Algo::kDOpt:
      return solver::branch_and_bound(solver::SelectionProblem(dict, K, Objective::kDOpt),
                                      settings.bnb);
    case Algo::kRandA:
      return solver::rand_minimax(solver::SelectionProblem(dict, K, Objective::kAOpt),
                                  settings.rand_trials, seed);
    case Algo::kRandD:
      return solver::rand_minimax(solver::SelectionProblem(dict, K, Objective::kDOpt),
                                  settings.rand_trials, seed);
    case Algo::kRandE:
      return solver::rand_minimax(solver::SelectionProblem(dict, K, Objective::kEOpt),
                                  settings.rand_trials, seed);
    case Algo::kExhaustive:
      return solver::exhaustive_oracle(solver::SelectionProblem(dict, K, Objective::kEOpt),
                                       settings.exhaustive_budget);
  }
  throw ValidationError("unknown algorithm");
}

WorstTarget worst_target_metrics(const Dictionary& dict, const solver::Selection& selection,
                                 Criterion criterion) {
  if (selection.empty()) throw DomainError("worst_target_metrics: empty selection");
  for (std::size_t m : selection) {
    if (m >= dict.num_candidates()) throw DomainError("worst_target_metrics: index out of range");
  }
  WorstTarget worst;
  double worst_phi = -kInf;
  fisher::InfoSummary worst_summary;
  for (std::size_t n = 0; n < dict.num_targets(); ++n) {
    fisher::InfoSummary s;
    for (std::size_t m : selection) {
      const double l = dict.lambda(m, n);
      const double a = 2.0 * dict.psi(m, n);
      s.S += l;
      s.u += l * std::cos(a);
      s.v += l * std::sin(a);
    }
    s.r = std::hypot(s.u, s.v);
    double phi = kInf;
    if (!fisher::is_singular(s)) {
      const fisher::ObjectiveTriple o = fisher::objectives(s);
      phi = criterion == Criterion::kA ? o.phi_a : criterion == Criterion::kD ? o.phi_d : o.phi_e;
    }
    if (phi > worst_phi) {
      worst_phi = phi;
      worst.index = n;
      worst_summary = s;
    }
  }
  if (fisher::is_singular(worst_summary)) {
    worst.singular = true;
    worst.metrics = {kInf, kInf, kInf};
  } else {
    worst.metrics = fisher::metrics(worst_summary);
  }
  return worst;
}

bool TrialRecord::flagged() const {
  return !error.empty() || status == "Infeasible" || status == "Error" || !std::isfinite(peb_m) ||
         !std::isfinite(cer_m) || !std::isfinite(mad_m);
}

void fill_record(TrialRecord& rec, const Dictionary& dict, const solver::SolveReport& report) {
  rec.status = std::string(solver::to_string(report.status));
  rec.raw_value = report.raw_value;
  rec.bound = report.bound;
  rec.gap = report.gap;
  rec.nodes = report.nodes_explored;
  rec.runtime_ms = report.runtime_ms;
  rec.selection = report.selection;
  if (report.status == solver::Status::kInfeasible || report.selection.empty()) {
    rec.peb_m = rec.cer_m = rec.mad_m = kInf;
    rec.worst_target_index = 0;
    return;
  }
  rec.peb_m = worst_target_metrics(dict, report.selection, Criterion::kA).metrics.peb_m;
  rec.cer_m = worst_target_metrics(dict, report.selection, Criterion::kD).metrics.cer_m;
  const WorstTarget e = worst_target_metrics(dict, report.selection, Criterion::kE);
  rec.mad_m = e.metrics.mad_m;
  rec.worst_target_index = e.index;
}

namespace {

TrialRecord blank_record(std::size_t trial_id, Algo algo, double d, std::size_t K,
                         std::uint64_t seed) {
  TrialRecord rec;
  rec.trial_id = trial_id;
  rec.algo = std::string(to_string(algo));
  rec.d_m = d;
  rec.K = K;
  rec.seed = seed;
  return rec;
}

void mark_error(TrialRecord& rec, const std::string& what) {
  rec.status = "Error";
  rec.error = what;
  rec.peb_m = rec.cer_m = rec.mad_m = kInf;
  rec.raw_value = 0.0;
  rec.bound = rec.gap = std::numeric_limits<double>::quiet_NaN();
}

Dictionary trial_dictionary(const Scene& scene, double d, std::uint64_t seed) {
  Scene s = scene;
  s.region.spacing_m = d;
  validate(s);
  return build_dictionary(s, generate_anchor_grid(s.region, draw_shift(seed, d)));
}

void solve_into(TrialRecord& rec, const Dictionary& dict, std::size_t K, Algo algo,
                std::uint64_t seed, const SolverSettings& settings) {
  try {
    fill_record(rec, dict, solve(dict, K, algo, algo_seed(seed, algo), settings));
  } catch (const Error& e) {
    mark_error(rec, e.what());
  }
}

}  // namespace

TrialRecord run_trial(const Scene& scene, double d, std::size_t K, Algo algo, std::uint64_t seed,
                      const SolverSettings& settings) {
  TrialRecord rec = blank_record(0, algo, d, K, seed);
  Dictionary dict;
  try {
    dict = trial_dictionary(scene, d, seed);
  } catch (const Error& e) {
    mark_error(rec, e.what());
    return rec;
  }
  solve_into(rec, dict, K, algo, seed, settings);
  return rec;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t d_index, std::size_t K_index,
                         std::size_t trial_index) {
  return mix_seed({base_seed, d_index, K_index, trial_index});
}

std::uint64_t algo_seed(std::uint64_t trial_seed, Algo algo) {
  return mix_seed({trial_seed, static_cast<std::uint64_t>(algo) + 1});
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config,
                                        const std::function<void(const TrialRecord&)>& sink) {
  if (config.d_list.empty() || config.K_list.empty() || config.algos.empty() ||
      config.trials == 0) {
    throw ValidationError("experiment: d, K, algorithm lists and trials must be nonempty");
  }
  const std::size_t nK = config.K_list.size(), nT = config.trials, nA = config.algos.size();
  const std::size_t units = config.d_list.size() * nK * nT;
  std::vector<TrialRecord> records(units * nA);

  auto run_unit = [&](std::size_t u) {
    const std::size_t t = u % nT, ki = (u / nT) % nK, di = u / (nT * nK);
    const double d = config.d_list[di];
    const std::size_t K = config.K_list[ki];
    const std::uint64_t seed = trial_seed(config.base_seed, di, ki, t);
    Dictionary dict;
    std::string failure;
    try {
      dict = trial_dictionary(config.scene, d, seed);
    } catch (const Error& e) {
      failure = e.what();
    }
    for (std::size_t a = 0; a < nA; ++a) {
      TrialRecord& rec = records[u * nA + a];
      rec = blank_record(t, config.algos[a], d, K, seed);
      if (!failure.empty()) {
        mark_error(rec, failure);
      } else {
        solve_into(rec, dict, K, config.algos[a], seed, config.settings);
      }
    }
  };

  std::mutex mu;
  std::vector<char> done(units, 0);
  std::size_t flushed = 0;
  auto complete = [&](std::size_t u) {
    std::lock_guard<std::mutex> lock(mu);
    done[u] = 1;
    while (flushed < units && done[flushed]) {
      if (sink) {
        for (std::size_t a = 0; a < nA; ++a) sink(records[flushed * nA + a]);
      }
      ++flushed;
    }
  };

  std::size_t workers = config.workers;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, units);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t u; (u = next.fetch_add(1)) < units;) {
      run_unit(u);
      complete(u);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ParseError(where + "." + key + ": unknown field");
  }
}

template <class T>
T get_number(const json& obj, const std::string& where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) {
      throw ParseError(where + "." + key + ": expected a non-negative integer");
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
  } else if (!v.is_number()) {
    throw ParseError(where + "." + key + ": expected a number");
  }
  return v.get<T>();
}

}  // namespace

ExperimentConfig load_experiment(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(doc, "config", {"scene", "experiment"});
  ExperimentConfig cfg;
  cfg.scene = load_scene(doc.contains("scene") ? doc["scene"].dump() : std::string("{}"));
  if (!doc.contains("experiment")) return cfg;

  const json& e = doc["experiment"];
  const std::string w = "experiment";
  check_keys(e, w,
             {"d_m", "K", "algos", "trials", "base_seed", "workers", "eps_gap", "time_limit_ms",
              "max_nodes", "angle_grid_size", "rand_trials", "exhaustive_budget"});
  if (e.contains("d_m")) {
    if (!e["d_m"].is_array()) throw ParseError(w + ".d_m: expected an array of numbers");
    cfg.d_list.clear();
    for (const auto& v : e["d_m"]) {
      if (!v.is_number()) throw ParseError(w + ".d_m: expected an array of numbers");
      cfg.d_list.push_back(v.get<double>());
    }
  }
  if (e.contains("K")) {
    if (!e["K"].is_array()) throw ParseError(w + ".K: expected an array of integers");
    cfg.K_list.clear();
    for (const auto& v : e["K"]) {
      if (!v.is_number_unsigned()) throw ParseError(w + ".K: expected an array of integers");
      cfg.K_list.push_back(v.get<std::size_t>());
    }
  }
  if (e.contains("algos")) {
    if (!e["algos"].is_array()) throw ParseError(w + ".algos: expected an array of names");
    cfg.algos.clear();
    for (const auto& v : e["algos"]) {
      if (!v.is_string()) throw ParseError(w + ".algos: expected an array of names");
      cfg.algos.push_back(algo_from_string(v.get<std::string>()));
    }
  }
  cfg.trials = get_number<std::size_t>(e, w, "trials", cfg.trials);
  cfg.base_seed = get_number<std::uint64_t>(e, w, "base_seed", cfg.base_seed);
  cfg.workers = get_number<std::size_t>(e, w, "workers", cfg.workers);
  auto& s = cfg.settings;
  s.bnb.eps_gap = get_number<double>(e, w, "eps_gap", s.bnb.eps_gap);
  s.bnb.time_limit_ms = get_number<double>(e, w, "time_limit_ms", s.bnb.time_limit_ms);
  s.bnb.max_nodes = get_number<std::uint64_t>(e, w, "max_nodes", s.bnb.max_nodes);
  s.bnb.angle_grid_size = get_number<int>(e, w, "angle_grid_size", s.bnb.angle_grid_size);
  s.rand_trials = get_number<std::size_t>(e, w, "rand_trials", s.rand_trials);
  s.exhaustive_budget = get_number<double>(e, w, "exhaustive_budget", s.exhaustive_budget);

  if (cfg.d_list.empty() || cfg.K_list.empty() || cfg.algos.empty()) {
    throw ValidationError(w + ": d_m, K and algos must be nonempty");
  }
  for (double d : cfg.d_list)
    if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError(w + ".d_m: spacings must be > 0");
  for (std::size_t K : cfg.K_list)
    if (K < 2) throw ValidationError(w + ".K: at least 2 anchors are needed");
  if (cfg.trials == 0) throw ValidationError(w + ".trials: must be >= 1");
  if (s.rand_trials == 0) throw ValidationError(w + ".rand_trials: must be >= 1");
  if (!(s.bnb.eps_gap >= 0.0)) throw ValidationError(w + ".eps_gap: must be >= 0");
  if (!(s.bnb.time_limit_ms >= 0.0)) throw ValidationError(w + ".time_limit_ms: must be >= 0");
  if (s.bnb.angle_grid_size < 1) throw ValidationError(w + ".angle_grid_size: must be >= 1");
  return cfg;
}

ExperimentConfig load_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_experiment(ss.str());
}

json experiment_to_json(const ExperimentConfig& c) {
  json algos = json::array();
  for (Algo a : c.algos) algos.push_back(std::string(to_string(a)));
  return json{{"scene", scene_to_json(c.scene)},
              {"experiment",
               {{"d_m", c.d_list},
                {"K", c.K_list},
                {"algos", algos},
                {"trials", c.trials},
                {"base_seed", c.base_seed},
                {"workers", c.workers},
                {"eps_gap", c.settings.bnb.eps_gap},
                {"time_limit_ms", c.settings.bnb.time_limit_ms},
                {"max_nodes", c.settings.bnb.max_nodes},
                {"angle_grid_size", c.settings.bnb.angle_grid_size},
                {"rand_trials", c.settings.rand_trials},
                {"exhaustive_budget", c.settings.exhaustive_budget}}}};
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') c = ' ';
  return s;
}

constexpr const char* kResultsHeader =
    "trial_id,algo,d_m,K,seed,peb_m,cer_m,mad_m,raw_value,bound,gap,status,nodes,"
    "worst_target_index,selection,error";

double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') {
    throw FormatError("results csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || s[0] == '-') {
    throw FormatError("results csv line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_results_header(std::ostream& out) { out << kResultsHeader << '\n'; }

void write_result_row(std::ostream& out, const TrialRecord& r) {
  std::string sel;
  for (std::size_t i = 0; i < r.selection.size(); ++i) {
    if (i) sel += ';';
    sel += std::to_string(r.selection[i]);
  }
  out << r.trial_id << ',' << r.algo << ',' << fmt(r.d_m) << ',' << r.K << ',' << r.seed << ','
      << fmt(r.peb_m) << ',' << fmt(r.cer_m) << ',' << fmt(r.mad_m) << ',' << fmt(r.raw_value)
      << ',' << fmt(r.bound) << ',' << fmt(r.gap) << ',' << r.status << ',' << r.nodes << ','
      << r.worst_target_index << ',' << sel << ',' << clean(r.error) << '\n';
}

void write_timings_header(std::ostream& out) { out << "trial_id,algo,d_m,K,seed,runtime_ms\n"; }

void write_timing_row(std::ostream& out, const TrialRecord& r) {
  out << r.trial_id << ',' << r.algo << ',' << fmt(r.d_m) << ',' << r.K << ',' << r.seed << ','
      << fmt(r.runtime_ms) << '\n';
}

std::vector<TrialRecord> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("results csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw FormatError("results csv: unexpected header");
  std::vector<TrialRecord> out;
  std::size_t no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 16) {
      throw FormatError("results csv line " + std::to_string(no) + ": expected 16 fields, got " +
                        std::to_string(f.size()));
    }
    TrialRecord r;
    r.trial_id = parse_uint(f[0], no);
    r.algo = f[1];
    r.d_m = parse_double(f[2], no);
    r.K = parse_uint(f[3], no);
    r.seed = parse_uint(f[4], no);
    r.peb_m = parse_double(f[5], no);
    r.cer_m = parse_double(f[6], no);
    r.mad_m = parse_double(f[7], no);
    r.raw_value = parse_double(f[8], no);
    r.bound = parse_double(f[9], no);
    r.gap = parse_double(f[10], no);
    r.status = f[11];
    r.nodes = parse_uint(f[12], no);
    r.worst_target_index = parse_uint(f[13], no);
    if (!f[14].empty())
      for (const auto& s : split(f[14], ';')) r.selection.push_back(parse_uint(s, no));
    r.error = f[15];
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

double quantile_sorted(const std::vector<double>& x, double p) {
  const double h = (static_cast<double>(x.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= x.size()) return x.back();
  return x[lo] + (h - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

std::string format_key_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

json box_json(const BoxStats& b) {
  if (b.empty) return json{{"empty", true}, {"count", 0}};
  return json{{"empty", false},       {"count", b.count},           {"median", b.median},
              {"q1", b.q1},           {"q3", b.q3},                 {"whisker_lo", b.whisker_lo},
              {"whisker_hi", b.whisker_hi}, {"outliers", b.outliers}};
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats b;
  if (values.empty()) return b;
  std::sort(values.begin(), values.end());
  b.empty = false;
  b.count = values.size();
  b.q1 = quantile_sorted(values, 0.25);
  b.median = quantile_sorted(values, 0.5);
  b.q3 = quantile_sorted(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_lo = b.q1;
  b.whisker_hi = b.q3;
  bool have_lo = false;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
      continue;
    }
    if (!have_lo) {
      b.whisker_lo = std::min(v, b.q1);
      have_lo = true;
    }
    b.whisker_hi = std::max(v, b.q3);
  }
  return b;
}

std::vector<GroupStats> aggregate(const std::vector<TrialRecord>& records,
                                  const std::vector<std::string>& group_keys) {
  for (const auto& k : group_keys) {
    if (k != "algo" && k != "d" && k != "K" && k != "status") {
      throw ValidationError("group-by: unknown key '" + k + "' (expected algo, d, K or status)");
    }
  }
  std::vector<GroupStats> groups;
  std::vector<std::vector<const TrialRecord*>> members;
  std::map<std::vector<std::string>, std::size_t> index;
  for (const auto& r : records) {
    std::vector<std::string> key;
    for (const auto& k : group_keys) {
      if (k == "algo") key.push_back(r.algo);
      else if (k == "d") key.push_back(format_key_value(r.d_m));
      else if (k == "K") key.push_back(std::to_string(r.K));
      else key.push_back(r.status);
    }
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) {
      GroupStats g;
      for (std::size_t i = 0; i < group_keys.size(); ++i) g.key[group_keys[i]] = key[i];
      groups.push_back(std::move(g));
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<double> peb, cer, mad;
    for (const TrialRecord* r : members[g]) {
      ++groups[g].records;
      if (r->flagged()) {
        ++groups[g].flagged;
        continue;
      }
      peb.push_back(r->peb_m);
      cer.push_back(r->cer_m);
      mad.push_back(r->mad_m);
    }
    groups[g].peb = box_stats(std::move(peb));
    groups[g].cer = box_stats(std::move(cer));
    groups[g].mad = box_stats(std::move(mad));
  }
  return groups;
}

json aggregate_to_json(const std::vector<GroupStats>& groups) {
  json out = json::object();
  for (const auto& g : groups) {
    std::string name;
    for (const auto& [k, v] : g.key) {
      if (!name.empty()) name += ',';
      name += k + "=" + v;
    }
    if (name.empty()) name = "all";
    out[name] = json{{"key", g.key},          {"records", g.records},
                     {"flagged", g.flagged},  {"peb_m", box_json(g.peb)},
                     {"cer_m", box_json(g.cer)}, {"mad_m", box_json(g.mad)}};
  }
  return out;
}

}  // namespace anchoropt::harness
