#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "anchoropt/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "anchoropt");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = anchoropt::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / "anchoropt_cli_test";
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("closure prints the optima") {
  const Run r = run({"closure", "--weights", "1.5,2,2.3,2.5"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["feasible"] == true);
  CHECK(j["residual"].get<double>() <= 1e-9 * 8.3);
  CHECK(j["optimum"]["phi_e"].get<double>() == doctest::Approx(2 / 8.3));
  CHECK(run({"closure", "--weights", "1,1,5"}).code == 1);
  CHECK(run({"closure", "--weights", "1,x"}).code == 1);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({"closure", "--weights", "1,2", "--bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"solve", "--dict", "x", "--algo", "simplex"}).code == 2);
  const Run h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("dict-build") != std::string::npos);
}

TEST_CASE("scene, dictionary and solve pipeline") {
  const fs::path dir = scratch();
  write(dir / "scene.json", R"({"target_floors": [1]})");
  write(dir / "broken.json", R"({"building": {"floorz": 1}})");

  const Run v = run({"scene-validate", "--config", (dir / "scene.json").string()});
  REQUIRE(v.code == 0);
  CHECK(json::parse(v.out)["num_candidates"] == 112);
  const Run bad = run({"scene-validate", "--config", (dir / "broken.json").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("building.floorz") != std::string::npos);
  CHECK(run({"scene-validate", "--config", (dir / "missing.json").string()}).code == 1);

  const std::string dict = (dir / "d.bin").string();
  REQUIRE(run({"dict-build", "--config", (dir / "scene.json").string(), "--out", dict, "--seed",
               "4", "--quiet"})
              .code == 0);
  const Run s = run({"solve", "--dict", dict, "--K", "3", "--algo", "dopt", "--quiet"});
  REQUIRE(s.code == 0);
  CHECK(s.err.empty());
  const json j = json::parse(s.out);
  CHECK(j["status"] == "EpsOptimal");
  CHECK(j["anchors"].size() == 3);
  CHECK(j["gap"].get<double>() <= 1e-3);

  const Run quiet_after = run({"--verbose", "solve", "--dict", dict, "--K", "3", "--algo", "rand-e",
                               "--seed", "5", "--out", (dir / "r.json").string()});
  CHECK(quiet_after.code == 0);
  CHECK(quiet_after.out.empty());
  CHECK(fs::exists(dir / "r.json"));

  const Run inf = run({"solve", "--dict", dict, "--K", "500", "--algo", "eopt"});
  CHECK(inf.code == 1);
  CHECK(json::parse(inf.out)["status"] == "Infeasible");
  CHECK(run({"solve", "--dict", (dir / "none.bin").string()}).code == 1);
}

TEST_CASE("monte carlo run and report") {
  const fs::path dir = scratch();
  write(dir / "exp.json", R"({"scene": {"target_floors": [1]},
    "experiment": {"algos": ["eopt", "rand-e"], "trials": 2, "rand_trials": 100}})");
  const fs::path out = dir / "mc";
  fs::remove_all(out);
  REQUIRE(run({"mc", "run", "--config", (dir / "exp.json").string(), "--out", out.string(),
               "--quiet"})
              .code == 0);
  CHECK(fs::exists(out / "results.csv"));
  CHECK(fs::exists(out / "timings.csv"));
  std::ifstream in(out / "results.csv");
  std::string first;
  std::getline(in, first);
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const fs::path out2 = dir / "mc2";
  fs::remove_all(out2);
  REQUIRE(run({"mc-run", "--config", (dir / "exp.json").string(), "--out", out2.string(),
               "--workers", "2", "--quiet"})
              .code == 0);
  std::ifstream in2(out2 / "results.csv");
  const std::string all2((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());
  CHECK(all2 == first + "\n" + body);

  const Run rep = run({"report", "--in", out.string(), "--group-by", "algo,d", "--quiet"});
  REQUIRE(rep.code == 0);
  const json j = json::parse(rep.out);
  CHECK(j.contains("algo=eopt,d=5"));
  CHECK(j["algo=eopt,d=5"]["records"] == 2);
  CHECK(run({"report", "--in", out.string(), "--group-by", "colour"}).code == 1);
}

TEST_CASE("overlap study") {
  const Run r = run({"overlap", "--bandwidth-hz", "1e8", "--max-delay-s", "1e-7", "--points", "10",
                     "--quiet"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "delta_s,delta_times_b,loss_fraction");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 10);
  CHECK(run({"overlap", "--points", "1"}).code == 1);
}
