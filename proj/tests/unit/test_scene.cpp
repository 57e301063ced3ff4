#include <doctest.h>

#include <set>

#include "anchoropt/error.hpp"
#include "anchoropt/scene.hpp"
#include "generators.hpp"

using namespace anchoropt;

TEST_CASE("default scene has the simulation values") {
  const Scene s = load_scene("{}");
  CHECK(s.system.bandwidth_hz == 200e6);
  CHECK(s.system.tx_power_dbm == 30);
  CHECK(s.system.carrier_hz == 10e9);
  CHECK(s.building.half_length_m == 15);
  CHECK(s.building.num_floors == 10);
  CHECK(s.targets.size() == 40);
  CHECK(s.region.lo == Vec3{-15, -30, 0});
  CHECK(s.region.hi == Vec3{15, -15, 15});
}

TEST_CASE("target_floors selects floors, floor-major") {
  const Scene s = load_scene(R"({"target_floors": [1, 2, 3]})");
  REQUIRE(s.targets.size() == 12);
  CHECK(s.targets[0] == Vec3{-7.5, 7.5, 1.5});
  CHECK(s.targets[1] == Vec3{-7.5, 22.5, 1.5});
  CHECK(s.targets[2] == Vec3{7.5, 7.5, 1.5});
  CHECK(s.targets[4].z == 4.5);
  CHECK(s.targets[11] == Vec3{7.5, 22.5, 7.5});
}

TEST_CASE("floor plane heights") {
  BuildingGeometry b;
  CHECK(b.floor_plane_z(1) == 1.5);
  CHECK(b.floor_plane_z(10) == 28.5);
}

TEST_CASE("unknown config fields are rejected by name") {
  try {
    load_scene(R"({"building": {"floors": 3}})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("building.floors") != std::string::npos);
  }
  CHECK_THROWS_AS(load_scene(R"({"bogus": 1})"), ParseError);
  CHECK_THROWS_AS(load_scene("{not json"), ParseError);
  CHECK_THROWS_AS(load_scene(R"({"system": {"bandwidth_hz": "wide"}})"), ParseError);
}

TEST_CASE("invalid scenes fail validation") {
  CHECK_THROWS_AS(load_scene(R"({"targets": [[0, -1, 1.5]]})"), ValidationError);
  CHECK_THROWS_AS(load_scene(R"({"targets": [[0, 5, 2.0]]})"), ValidationError);
  CHECK_THROWS_AS(load_scene(R"({"targets": [[40, 5, 1.5]]})"), ValidationError);
  CHECK_THROWS_AS(load_scene(R"({"region": {"hi": [15, 1, 15]}})"), ValidationError);
  CHECK_THROWS_AS(load_scene(R"({"region": {"spacing_m": 0}})"), ValidationError);
  CHECK_THROWS_AS(load_scene(R"({"system": {"bandwidth_hz": -1}})"), ValidationError);
  CHECK_THROWS_AS(load_scene(R"({"target_floors": [11]})"), ValidationError);
  CHECK_THROWS_AS(load_scene(R"({"targets": [[0, 5, 1.5]], "target_floors": [1]})"), ParseError);
}

TEST_CASE("explicit targets accept arrays and objects") {
  const Scene s = load_scene(R"({"targets": [[0, 5, 1.5], {"x": 1, "y": 2, "z": 4.5}]})");
  REQUIRE(s.targets.size() == 2);
  CHECK(s.targets[1] == Vec3{1, 2, 4.5});
}

TEST_CASE("scene JSON round-trips and hashes stably") {
  const Scene a = load_scene(R"({"target_floors": [2], "system": {"ked_mode": "continuous"}})");
  const Scene b = load_scene(scene_to_json(a).dump());
  CHECK(scene_to_json(a) == scene_to_json(b));
  CHECK(scene_hash(a) == scene_hash(b));
  CHECK(b.system.ked_mode == KedMode::kContinuous);
  Scene c = a;
  c.system.bandwidth_hz = 100e6;
  CHECK(scene_hash(c) != scene_hash(a));
}

TEST_CASE("grid counts and ordering") {
  AnchorRegion r;
  const auto n = grid_axis_counts(r);
  CHECK(n[0] == 7);
  CHECK(n[1] == 4);
  CHECK(n[2] == 4);
  const auto g = generate_anchor_grid(r, {});
  REQUIRE(g.size() == 112);
  CHECK(g[0] == Vec3{-15, -30, 0});
  CHECK(g[1] == Vec3{-15, -30, 5});
  CHECK(g[4] == Vec3{-15, -25, 0});
  CHECK(g[16] == Vec3{-10, -30, 0});
  CHECK(g.back() == Vec3{15, -15, 15});
}

TEST_CASE("half-spacing shift keeps count and stays inside the box") {
  AnchorRegion r;
  const auto g = generate_anchor_grid(r, {2.5, 2.5, 2.5});
  CHECK(g.size() == 112);
  for (const auto& p : g) {
    CHECK(p.x >= r.lo.x);
    CHECK(p.x <= r.hi.x);
    CHECK(p.y >= r.lo.y);
    CHECK(p.y <= r.hi.y);
    CHECK(p.z >= r.lo.z);
    CHECK(p.z <= r.hi.z);
  }
  CHECK_THROWS_AS(generate_anchor_grid(r, {2.6, 0, 0}), DomainError);
}

TEST_CASE("property: random shifts preserve count and containment") {
  Rng rng(11);
  for (int it = 0; it < 200; ++it) {
    AnchorRegion r;
    r.spacing_m = rng.uniform(0.7, 6.0);
    const Vec3 shift = draw_shift(rng.below(1u << 30), r.spacing_m);
    const auto n = grid_axis_counts(r);
    const auto g = generate_anchor_grid(r, shift);
    REQUIRE(g.size() == n[0] * n[1] * n[2]);
    for (const auto& p : g) {
      REQUIRE(p.x >= r.lo.x);
      REQUIRE(p.x <= r.hi.x);
      REQUIRE(p.y >= r.lo.y);
      REQUIRE(p.y <= r.hi.y);
      REQUIRE(p.z >= r.lo.z);
      REQUIRE(p.z <= r.hi.z);
    }
  }
}

TEST_CASE("candidate count grows as spacing shrinks") {
  std::size_t prev = 0;
  for (double d : {5.0, 4.0, 3.0, 2.0, 1.0}) {
    AnchorRegion r;
    r.spacing_m = d;
    const auto n = grid_axis_counts(r);
    CHECK(n[0] * n[1] * n[2] > prev);
    prev = n[0] * n[1] * n[2];
  }
  CHECK(prev == 31 * 16 * 16);
}

TEST_CASE("draw_shift is deterministic and bounded") {
  const Vec3 a = draw_shift(42, 5.0), b = draw_shift(42, 5.0), c = draw_shift(43, 5.0);
  CHECK(a == b);
  CHECK(!(a == c));
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 s = draw_shift(rng.below(1000000), 4.0);
    REQUIRE(std::abs(s.x) <= 2.0);
    REQUIRE(std::abs(s.y) <= 2.0);
    REQUIRE(std::abs(s.z) <= 2.0);
  }
}

TEST_CASE("default_targets rejects bad floors") {
  BuildingGeometry b;
  CHECK_THROWS_AS(default_targets(b, {}), DomainError);
  CHECK_THROWS_AS(default_targets(b, {0}), DomainError);
}
