#include <doctest.h>

#include <cmath>
#include <sstream>

#include "anchoropt/error.hpp"
#include "anchoropt/harness.hpp"
#include "generators.hpp"

using namespace anchoropt;
using namespace anchoropt::harness;

namespace {

Scene desk_scene() { return load_scene(R"({"target_floors": [1, 2, 3]})"); }

std::string csv_of(const std::vector<TrialRecord>& recs) {
  std::ostringstream out;
  write_results_header(out);
  for (const auto& r : recs) write_result_row(out, r);
  return out.str();
}

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.scene = desk_scene();
  cfg.algos = {Algo::kEOpt, Algo::kRandD};
  cfg.trials = 3;
  cfg.settings.rand_trials = 200;
  return cfg;
}

}  // namespace

TEST_CASE("algorithm names") {
  for (Algo a : {Algo::kEOpt, Algo::kDOpt, Algo::kRandA, Algo::kRandD, Algo::kRandE,
                 Algo::kExhaustive}) {
    CHECK(algo_from_string(to_string(a)) == a);
  }
  CHECK_THROWS_AS(algo_from_string("simplex"), ValidationError);
}

TEST_CASE("box statistics") {
  const BoxStats b = box_stats({5, 1, 4, 2, 3});
  CHECK(b.median == 3);
  CHECK(b.q1 == 2);
  CHECK(b.q3 == 4);
  CHECK(b.whisker_lo == 1);
  CHECK(b.whisker_hi == 5);
  CHECK(b.outliers.empty());

  const BoxStats one = box_stats({2.5});
  CHECK(one.median == 2.5);
  CHECK(one.q1 == 2.5);
  CHECK(one.q3 == 2.5);
  CHECK(one.whisker_lo == 2.5);
  CHECK(one.whisker_hi == 2.5);

  const BoxStats out = box_stats({1, 2, 3, 4, 5, 100});
  CHECK(out.outliers == std::vector<double>{100});
  CHECK(out.whisker_hi == 5);
  CHECK(box_stats({}).empty);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK(std::isnan(median({})));
}

TEST_CASE("worst-target selection") {
  // Target 1 has uniformly weaker links, so it is worst for every criterion.
  std::vector<double> lam{4, 3, 2, 1, 1, 0.5}, psi{0.3, 1.4, 2.5, 0.3, 1.4, 2.5};
  const Dictionary d({{0, -1, 0}, {1, -1, 0}, {2, -1, 0}}, {{0, 1, 0}, {1, 1, 0}}, lam, psi);
  for (Criterion c : {Criterion::kA, Criterion::kD, Criterion::kE}) {
    CHECK(worst_target_metrics(d, {0, 1, 2}, c).index == 1);
  }
  const Dictionary single({{0, -1, 0}, {1, -1, 0}}, {{0, 1, 0}}, {1, 2}, {0.5, 2.0});
  CHECK(worst_target_metrics(single, {0, 1}, Criterion::kE).index == 0);
  const Dictionary flat({{0, -1, 0}, {1, -1, 0}}, {{0, 1, 0}}, {1, 2}, {0.5, 0.5});
  CHECK(worst_target_metrics(flat, {0, 1}, Criterion::kD).singular);
}

TEST_CASE("property: worst target agrees with a direct scan") {
  Rng rng(81);
  for (int it = 0; it < 200; ++it) {
    const Dictionary d = testing::random_dictionary(rng, 10, 2 + rng.below(6));
    const solver::Selection sel{0, 3, 5, 8};
    for (Criterion c : {Criterion::kA, Criterion::kD, Criterion::kE}) {
      std::size_t arg = 0;
      double worst = -1;
      for (std::size_t n = 0; n < d.num_targets(); ++n) {
        std::vector<fisher::InfoComponent> comp;
        for (auto m : sel) comp.push_back({d.lambda(m, n), d.psi(m, n)});
        const auto o = fisher::objectives(fisher::summarize(comp));
        const double phi = c == Criterion::kA ? o.phi_a : c == Criterion::kD ? o.phi_d : o.phi_e;
        if (phi > worst) {
          worst = phi;
          arg = n;
        }
      }
      REQUIRE(worst_target_metrics(d, sel, c).index == arg);
    }
  }
}

TEST_CASE("trials are deterministic and consistent") {
  const Scene scene = desk_scene();
  SolverSettings s;
  const TrialRecord a = run_trial(scene, 5.0, 4, Algo::kDOpt, 123, s);
  const TrialRecord b = run_trial(scene, 5.0, 4, Algo::kDOpt, 123, s);
  CHECK(csv_of({a}) == csv_of({b}));
  CHECK(a.status == "EpsOptimal");
  CHECK(a.runtime_ms <= s.bnb.time_limit_ms);
  CHECK(a.selection.size() == 4);
  CHECK(a.gap <= s.bnb.eps_gap);

  const TrialRecord ex = run_trial(scene, 5.0, 2, Algo::kExhaustive, 123, s);
  CHECK(ex.gap == 0.0);
  CHECK(ex.status == "EpsOptimal");

  const TrialRecord bad = run_trial(scene, 100.0, 4, Algo::kEOpt, 1, s);
  CHECK(bad.status == "Error");
  CHECK(bad.flagged());
  CHECK(!bad.error.empty());
}

TEST_CASE("experiment counting, determinism and workers") {
  ExperimentConfig cfg = small_experiment();
  std::vector<TrialRecord> streamed;
  const auto recs = run_experiment(cfg, [&](const TrialRecord& r) { streamed.push_back(r); });
  REQUIRE(recs.size() == 6);
  CHECK(csv_of(streamed) == csv_of(recs));
  CHECK(recs[0].algo == "eopt");
  CHECK(recs[1].algo == "rand-d");
  CHECK(recs[0].seed == recs[1].seed);
  CHECK(recs[0].seed != recs[2].seed);
  CHECK(csv_of(run_experiment(cfg)) == csv_of(recs));
  cfg.workers = 3;
  CHECK(csv_of(run_experiment(cfg)) == csv_of(recs));

  cfg.workers = 1;
  cfg.base_seed += 1;
  CHECK(csv_of(run_experiment(cfg)) != csv_of(recs));
}

TEST_CASE("stored selections reproduce stored metrics") {
  ExperimentConfig cfg = small_experiment();
  cfg.algos = {Algo::kEOpt, Algo::kDOpt, Algo::kRandA};
  for (const auto& r : run_experiment(cfg)) {
    const Dictionary d = build_dictionary(
        cfg.scene, generate_anchor_grid(cfg.scene.region, draw_shift(r.seed, r.d_m)));
    const auto D = worst_target_metrics(d, r.selection, Criterion::kD);
    const auto E = worst_target_metrics(d, r.selection, Criterion::kE);
    const auto A = worst_target_metrics(d, r.selection, Criterion::kA);
    CHECK(r.cer_m == doctest::Approx(D.metrics.cer_m).epsilon(1e-9));
    CHECK(r.mad_m == doctest::Approx(E.metrics.mad_m).epsilon(1e-9));
    CHECK(r.peb_m == doctest::Approx(A.metrics.peb_m).epsilon(1e-9));
    CHECK(r.worst_target_index == E.index);
  }
}

TEST_CASE("results CSV round trip") {
  const auto recs = run_experiment(small_experiment());
  std::istringstream in(csv_of(recs));
  const auto back = read_results_csv(in);
  REQUIRE(back.size() == recs.size());
  CHECK(csv_of(back) == csv_of(recs));
  std::istringstream bad("trial_id,algo\n1,eopt\n");
  CHECK_THROWS_AS(read_results_csv(bad), FormatError);
}

TEST_CASE("aggregation") {
  auto recs = run_experiment(small_experiment());
  const auto groups = aggregate(recs, {"algo"});
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].key.at("algo") == "eopt");
  CHECK(groups[0].records == 3);
  CHECK(groups[0].cer.count == 3);
  CHECK(aggregate(recs, {}).size() == 1);
  CHECK_THROWS_AS(aggregate(recs, {"colour"}), ValidationError);

  for (auto& r : recs)
    if (r.algo == "rand-d") r.status = "Error";
  const auto flagged = aggregate(recs, {"algo"});
  CHECK(flagged[1].flagged == 3);
  CHECK(flagged[1].peb.empty);
  const auto js = aggregate_to_json(flagged);
  CHECK(js.contains("algo=eopt"));
  CHECK(js["algo=rand-d"]["cer_m"]["empty"] == true);
}

TEST_CASE("experiment config parsing") {
  const ExperimentConfig c = load_experiment(
      R"({"scene": {"target_floors": [1]}, "experiment": {"d_m": [5, 4], "K": [3],
          "algos": ["dopt"], "trials": 7, "base_seed": 18446744073709551615, "eps_gap": 0.01}})");
  CHECK(c.scene.targets.size() == 4);
  CHECK(c.d_list == std::vector<double>{5, 4});
  CHECK(c.K_list == std::vector<std::size_t>{3});
  CHECK(c.trials == 7);
  CHECK(c.base_seed == 18446744073709551615ull);
  CHECK(c.settings.bnb.eps_gap == 0.01);
  CHECK(load_experiment(experiment_to_json(c).dump()).trials == 7);
  CHECK_THROWS_AS(load_experiment(R"({"experiment": {"trails": 3}})"), ParseError);
  CHECK_THROWS_AS(load_experiment(R"({"experiment": {"K": [1]}})"), ValidationError);
  CHECK_THROWS_AS(load_experiment(R"({"experiment": {"algos": []}})"), ValidationError);
  CHECK_THROWS_AS(load_experiment(R"({"experiment": {"trials": -2}})"), ParseError);
}
