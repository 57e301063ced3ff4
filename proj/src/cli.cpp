#include "anchoropt/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchoropt/delayfim.hpp"
#include "anchoropt/dictionary.hpp"
#include "anchoropt/error.hpp"
#include "anchoropt/harness.hpp"
#include "anchoropt/polygon.hpp"
#include "anchoropt/scene.hpp"
#include "anchoropt/solver.hpp"

namespace anchoropt::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool quiet = false;
  bool verbose = false;

  std::ostream& note() {
    static std::ostream null(nullptr);
    return quiet ? null : err;
  }
};

// Writes to `path`, or to the output stream when `path` is empty.
void emit(Context& ctx, const std::string& path, const std::string& text) {
  if (path.empty()) {
    ctx.out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path);
  f << text;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') {
      throw ValidationError(std::string(what) + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError(std::string(what) + ": empty list");
  return out;
}

// --- scene-validate -------------------------------------------------------

struct SceneValidateArgs {
  std::string config, out;
};

int scene_validate(Context& ctx, const SceneValidateArgs& a) {
  const Scene scene = load_scene_file(a.config);
  const auto counts = grid_axis_counts(scene.region);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(scene_hash(scene)));
  json doc{{"valid", true},
           {"scene_hash", hash},
           {"num_targets", scene.targets.size()},
           {"grid_counts", counts},
           {"num_candidates", counts[0] * counts[1] * counts[2]},
           {"scene", scene_to_json(scene)}};
  emit(ctx, a.out, doc.dump(2) + "\n");
  ctx.note() << "scene ok: " << scene.targets.size() << " targets, "
             << counts[0] * counts[1] * counts[2] << " candidates\n";
  return 0;
}

// --- dict-build -----------------------------------------------------------

struct DictBuildArgs {
  std::string config, out, csv;
  double spacing_m = 0.0;
  std::uint64_t seed = 0;
  bool shift = false;
};

int dict_build(Context& ctx, const DictBuildArgs& a) {
  Scene scene = load_scene_file(a.config);
  if (a.spacing_m > 0.0) scene.region.spacing_m = a.spacing_m;
  validate(scene);
  const Vec3 shift = a.shift ? draw_shift(a.seed, scene.region.spacing_m) : Vec3{};
  const Dictionary dict = build_dictionary(scene, generate_anchor_grid(scene.region, shift));
  export_dictionary(dict, a.out);
  if (!a.csv.empty()) export_dictionary_csv(dict, a.csv);
  ctx.note() << "dictionary: M=" << dict.num_candidates() << " N=" << dict.num_targets()
             << " -> " << a.out << "\n";
  return 0;
}

// --- solve ----------------------------------------------------------------

struct SolveArgs {
  std::string dict, algo = "eopt", out;
  std::size_t K = 4;
  double eps_gap = 1e-3;
  double time_limit_ms = 70000.0;
  std::uint64_t max_nodes = 20'000'000;
  int angle_grid = 64;
  std::size_t rand_trials = 10000;
  std::uint64_t seed = 0;
};

int solve(Context& ctx, const SolveArgs& a) {
  const Dictionary dict = import_dictionary(a.dict);
  const harness::Algo algo = harness::algo_from_string(a.algo);
  harness::SolverSettings settings;
  settings.bnb.eps_gap = a.eps_gap;
  settings.bnb.time_limit_ms = a.time_limit_ms;
  settings.bnb.max_nodes = a.max_nodes;
  settings.bnb.angle_grid_size = a.angle_grid;
  settings.rand_trials = a.rand_trials;
  if (!(a.eps_gap >= 0.0)) throw ValidationError("--eps-gap must be >= 0");
  if (!(a.time_limit_ms >= 0.0)) throw ValidationError("--time-limit-ms must be >= 0");

  const solver::SolveReport r = harness::solve(dict, a.K, algo, a.seed, settings);
  harness::TrialRecord rec;
  harness::fill_record(rec, dict, r);

  json anchors = json::array();
  for (std::size_t m : r.selection) anchors.push_back(vec3_json(dict.candidates()[m]));
  json doc{{"algo", a.algo},
           {"K", a.K},
           {"M", dict.num_candidates()},
           {"N", dict.num_targets()},
           {"seed", a.seed},
           {"status", std::string(solver::to_string(r.status))},
           {"selection", r.selection},
           {"anchors", anchors},
           {"raw_value", number_or_null(r.raw_value)},
           {"objective_value", number_or_null(r.objective_value)},
           {"bound", number_or_null(r.bound)},
           {"gap", number_or_null(r.gap)},
           {"nodes_explored", r.nodes_explored},
           {"runtime_ms", r.runtime_ms},
           {"singular", r.singular},
           {"worst_target_index", rec.worst_target_index},
           {"metrics",
            {{"peb_m", number_or_null(rec.peb_m)},
             {"cer_m", number_or_null(rec.cer_m)},
             {"mad_m", number_or_null(rec.mad_m)}}}};
  emit(ctx, a.out, doc.dump(2) + "\n");
  ctx.note() << a.algo << ": " << solver::to_string(r.status) << " value=" << r.raw_value
             << " bound=" << r.bound << " gap=" << r.gap << " nodes=" << r.nodes_explored
             << " ms=" << r.runtime_ms << "\n";
  if (r.status == solver::Status::kInfeasible) {
    ctx.err << "error: no selection of " << a.K << " anchors exists among "
            << dict.num_candidates() << " candidates\n";
    return 1;
  }
  return 0;
}

// --- mc run ---------------------------------------------------------------

struct McArgs {
  std::string config, out;
  std::size_t trials = 0;
  std::size_t workers = 0;
  std::uint64_t base_seed = 0;
  bool base_seed_set = false;
  bool full = false;
};

int mc_run(Context& ctx, const McArgs& a) {
  harness::ExperimentConfig cfg = harness::load_experiment_file(a.config);
  if (a.full) {
    cfg.d_list = {5, 4, 3, 2, 1};
    cfg.K_list = {2, 3, 4, 5};
    cfg.trials = 300;
  }
  if (a.trials > 0) cfg.trials = a.trials;
  if (a.workers > 0) cfg.workers = a.workers;
  if (a.base_seed_set) cfg.base_seed = a.base_seed;

  fs::create_directories(a.out);
  const fs::path dir(a.out);
  std::ofstream results(dir / "results.csv", std::ios::binary);
  std::ofstream timings(dir / "timings.csv", std::ios::binary);
  if (!results || !timings) throw ValidationError("cannot write into " + a.out);
  {
    std::ofstream manifest(dir / "config.json", std::ios::binary);
    manifest << harness::experiment_to_json(cfg).dump(2) << "\n";
  }
  harness::write_results_header(results);
  harness::write_timings_header(timings);

  const std::size_t total =
      cfg.d_list.size() * cfg.K_list.size() * cfg.trials * cfg.algos.size();
  std::size_t written = 0, flagged = 0;
  const auto start = std::chrono::steady_clock::now();
  harness::run_experiment(cfg, [&](const harness::TrialRecord& rec) {
    harness::write_result_row(results, rec);
    harness::write_timing_row(timings, rec);
    results.flush();
    ++written;
    if (rec.flagged()) ++flagged;
    if (ctx.verbose) {
      ctx.err << "[" << written << "/" << total << "] " << rec.algo << " d=" << rec.d_m
              << " K=" << rec.K << " trial=" << rec.trial_id << " " << rec.status
              << " ms=" << rec.runtime_ms << "\n";
    }
  });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ctx.note() << "mc: " << written << " records (" << flagged << " flagged) in " << secs
             << " s -> " << (dir / "results.csv").string() << "\n";
  return 0;
}

// --- report ---------------------------------------------------------------

struct ReportArgs {
  std::string in, group_by = "algo,d", out;
};

int report(Context& ctx, const ReportArgs& a) {
  const fs::path path = fs::path(a.in) / "results.csv";
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open " + path.string());
  const auto records = harness::read_results_csv(f);
  std::vector<std::string> keys;
  std::stringstream ss(a.group_by);
  for (std::string k; std::getline(ss, k, ',');)
    if (!k.empty()) keys.push_back(k);
  const auto groups = harness::aggregate(records, keys);
  emit(ctx, a.out, harness::aggregate_to_json(groups).dump(2) + "\n");
  ctx.note() << "report: " << records.size() << " records in " << groups.size() << " groups\n";
  return 0;
}

// --- closure --------------------------------------------------------------

struct ClosureArgs {
  std::string weights, out;
};

int closure(Context& ctx, const ClosureArgs& a) {
  const std::vector<double> w = parse_list(a.weights, "--weights");
  const polygon::ClosureResult c = polygon::closure_angles(w);
  double S = 0.0;
  for (double x : w) S += x;
  json doc{{"weights", w}, {"S", S}, {"feasible", c.feasible}};
  if (c.feasible) {
    json theta = json::array(), psi = json::array();
    for (double t : c.angles) {
      theta.push_back(t * kRadToDeg);
      psi.push_back(t * kRadToDeg / 2.0);
    }
    const auto opt = polygon::single_target_optimum(w);
    doc["theta_deg"] = theta;
    doc["psi_deg"] = psi;
    doc["residual"] = c.residual;
    doc["has_boundary_angle"] = c.has_boundary_angle;
    doc["optimum"] = {{"phi_a", opt.phi_a}, {"phi_d", opt.phi_d}, {"phi_e", opt.phi_e}};
  }
  emit(ctx, a.out, doc.dump(2) + "\n");
  if (!c.feasible) {
    ctx.err << "error: the largest weight exceeds the sum of the others; no closed polygon\n";
    return 1;
  }
  ctx.note() << "closure: residual " << c.residual << " (S = " << S << ")\n";
  return 0;
}

// --- overlap --------------------------------------------------------------

struct OverlapArgs {
  double bandwidth_hz = 200e6;
  double max_delay_s = 50e-9;
  std::size_t points = 501;
  double gain1 = 1.0, gain2 = 1.0;
  double noise_psd = 1.0;
  std::string out;
};

int overlap(Context& ctx, const OverlapArgs& a) {
  if (a.points < 2) throw ValidationError("--points must be >= 2");
  if (!(a.max_delay_s > 0.0)) throw ValidationError("--max-delay-s must be > 0");
  delayfim::MultipathSpec spec;
  spec.gains = {a.gain1, a.gain2};
  spec.delays_s = {0.0, 0.0};
  spec.bandwidth_hz = a.bandwidth_hz;
  spec.noise_psd = a.noise_psd;
  std::vector<double> grid(a.points);
  for (std::size_t i = 0; i < a.points; ++i)
    grid[i] = a.max_delay_s * static_cast<double>(i + 1) / static_cast<double>(a.points);
  const auto curve = delayfim::overlap_loss_curve(spec, grid);
  std::ostringstream csv;
  csv.precision(17);
  csv << "delta_s,delta_times_b,loss_fraction\n";
  for (const auto& p : curve) {
    csv << p.delta_s << ',' << p.delta_s * a.bandwidth_hz << ',' << p.loss_fraction << '\n';
  }
  emit(ctx, a.out, csv.str());
  ctx.note() << "overlap: " << curve.size() << " points up to " << a.max_delay_s << " s\n";
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anchor placement for outdoor-to-indoor localization"};
  app.name("anchoropt");
  app.set_help_flag("--help", "Print this help message and exit");
  app.fallthrough();
  app.require_subcommand(1);
  Context ctx{out, err};
  app.add_flag("--quiet", ctx.quiet, "Suppress diagnostics");
  app.add_flag("--verbose", ctx.verbose, "Extra progress diagnostics");

  SceneValidateArgs sv;
  auto* c_sv = app.add_subcommand("scene-validate", "Validate a scene config");
  c_sv->add_option("--config", sv.config, "Scene JSON")->required();
  c_sv->add_option("--out", sv.out, "Output JSON path (default: stdout)");

  DictBuildArgs db;
  auto* c_db = app.add_subcommand("dict-build", "Build the candidate dictionary");
  c_db->add_option("--config", db.config, "Scene JSON")->required();
  c_db->add_option("--out", db.out, "Binary dictionary path")->required();
  c_db->add_option("--csv", db.csv, "Also write a CSV dump");
  c_db->add_option("--spacing-m", db.spacing_m, "Grid spacing d [m] (default: from config)");
  auto* shift_opt =
      c_db->add_option("--seed", db.seed, "Seed of the random grid shift (default: no shift)");

  SolveArgs so;
  auto* c_so = app.add_subcommand("solve", "Select K anchors from a dictionary");
  c_so->add_option("--dict", so.dict, "Binary dictionary")->required();
  c_so->add_option("--K", so.K, "Number of anchors [count]")->check(CLI::PositiveNumber);
  c_so->add_option("--algo", so.algo, "eopt, dopt, rand-a, rand-d, rand-e or exhaustive")
      ->check(CLI::IsMember({"eopt", "dopt", "rand-a", "rand-d", "rand-e", "exhaustive"}));
  c_so->add_option("--eps-gap", so.eps_gap, "Relative optimality gap [fraction]");
  c_so->add_option("--time-limit-ms", so.time_limit_ms, "Time limit [ms]");
  c_so->add_option("--max-nodes", so.max_nodes, "Node limit [count]");
  c_so->add_option("--angle-grid", so.angle_grid, "Bound angle grid size [count]")
      ->check(CLI::PositiveNumber);
  c_so->add_option("--rand-trials", so.rand_trials, "Random draws for rand-* [count]")
      ->check(CLI::PositiveNumber);
  c_so->add_option("--seed", so.seed, "Seed for the random baselines");
  c_so->add_option("--out", so.out, "Output JSON path (default: stdout)");

  McArgs mc;
  auto add_mc_options = [&](CLI::App* c) {
    c->add_option("--config", mc.config, "Experiment JSON")->required();
    c->add_option("--out", mc.out, "Output directory")->required();
    c->add_option("--trials", mc.trials, "Trials per (d, K) cell [count]");
    c->add_option("--workers", mc.workers, "Worker threads [count]");
    c->add_option_function<std::uint64_t>(
        "--base-seed",
        [&](std::uint64_t s) {
          mc.base_seed = s;
          mc.base_seed_set = true;
        },
        "Base seed (default: from config)");
    c->add_flag("--full", mc.full, "Full sweep: d in {5,4,3,2,1} m, K in {2,3,4,5}, 300 trials");
  };
  auto* c_mc = app.add_subcommand("mc", "Monte Carlo study");
  c_mc->require_subcommand(1);
  auto* c_mc_run = c_mc->add_subcommand("run", "Run an experiment");
  add_mc_options(c_mc_run);
  auto* c_mc_run2 = app.add_subcommand("mc-run", "Same as 'mc run'");
  add_mc_options(c_mc_run2);

  ReportArgs rp;
  auto* c_rp = app.add_subcommand("report", "Boxplot statistics of a results directory");
  c_rp->add_option("--in", rp.in, "Directory holding results.csv")->required();
  c_rp->add_option("--group-by", rp.group_by, "Comma list of algo, d, K, status");
  c_rp->add_option("--out", rp.out, "Output JSON path (default: stdout)");

  ClosureArgs cl;
  auto* c_cl = app.add_subcommand("closure", "Single-target polygon closure");
  c_cl->add_option("--weights", cl.weights, "Comma list of ranging weights [1/m^2]")->required();
  c_cl->add_option("--out", cl.out, "Output JSON path (default: stdout)");

  OverlapArgs ov;
  auto* c_ov = app.add_subcommand("overlap", "First-path information loss versus path overlap");
  c_ov->add_option("--bandwidth-hz", ov.bandwidth_hz, "Bandwidth B [Hz]")
      ->check(CLI::PositiveNumber);
  c_ov->add_option("--max-delay-s", ov.max_delay_s, "Largest path separation [s]");
  c_ov->add_option("--points", ov.points, "Grid points [count]");
  c_ov->add_option("--gain1", ov.gain1, "First path amplitude [linear]");
  c_ov->add_option("--gain2", ov.gain2, "Second path amplitude [linear]");
  c_ov->add_option("--noise-psd", ov.noise_psd, "Noise PSD N0 [W/Hz]")->check(CLI::PositiveNumber);
  c_ov->add_option("--out", ov.out, "Output CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n"
        << "run 'anchoropt --help' for usage\n";
    return 2;
  }
  db.shift = shift_opt->count() > 0;

  try {
    if (c_sv->parsed()) return scene_validate(ctx, sv);
    if (c_db->parsed()) return dict_build(ctx, db);
    if (c_so->parsed()) return solve(ctx, so);
    if (c_mc_run->parsed() || c_mc_run2->parsed()) return mc_run(ctx, mc);
    if (c_rp->parsed()) return report(ctx, rp);
    if (c_cl->parsed()) return closure(ctx, cl);
    if (c_ov->parsed()) return overlap(ctx, ov);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "usage error: no subcommand\n";
  return 2;
}

}  // namespace anchoropt::cli
