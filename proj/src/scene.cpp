#include "anchoropt/scene.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "anchoropt/error.hpp"
#include "anchoropt/random.hpp"

namespace anchoropt {

using nlohmann::json;

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

std::string_view to_string(KedMode mode) {
  return mode == KedMode::kFloorLos ? "floor-los" : "continuous";
}

KedMode ked_mode_from_string(std::string_view name) {
  if (name == "floor-los") return KedMode::kFloorLos;
  if (name == "continuous") return KedMode::kContinuous;
  throw ParseError("system.ked_mode: expected \"floor-los\" or \"continuous\", got \"" +
                   std::string(name) + "\"");
}

double BuildingGeometry::floor_plane_z(int floor) const {
  return (floor - 1) * floor_height_m + floor_height_m / 2.0;
}

AnchorRegion AnchorRegion::for_building(const BuildingGeometry& building, double spacing_m) {
  const double L = building.half_length_m;
  return AnchorRegion{{-L, -2.0 * L, 0.0}, {L, -L, L}, spacing_m};
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

void validate(const SystemParams& s) {
  require(std::isfinite(s.bandwidth_hz) && s.bandwidth_hz > 0, "system.bandwidth_hz must be > 0");
  require(std::isfinite(s.carrier_hz) && s.carrier_hz > s.bandwidth_hz,
          "system.carrier_hz must exceed bandwidth_hz");
  require(std::isfinite(s.noise_temp_k) && s.noise_temp_k > 0, "system.noise_temp_k must be > 0");
  require(std::isfinite(s.tx_power_dbm) && std::isfinite(s.tx_gain_dbi) &&
              std::isfinite(s.rx_gain_dbi) && std::isfinite(s.noise_figure_db),
          "system: gains, power and noise figure must be finite");
}

void validate(const BuildingGeometry& b) {
  require(std::isfinite(b.half_length_m) && b.half_length_m > 0, "building.half_length_m must be > 0");
  require(b.num_floors >= 1, "building.num_floors must be >= 1");
  require(std::isfinite(b.floor_height_m) && b.floor_height_m > 0,
          "building.floor_height_m must be > 0");
  require(std::isfinite(b.window_half_height_m) && b.window_half_height_m >= 0,
          "building.window_half_height_m must be >= 0");
}

void validate(const AnchorRegion& r) {
  require(is_finite(r.lo) && is_finite(r.hi), "region: lo/hi must be finite");
  require(r.lo.x < r.hi.x && r.lo.y < r.hi.y && r.lo.z < r.hi.z,
          "region: lo must be strictly below hi on every axis");
  const double edge = std::min({r.hi.x - r.lo.x, r.hi.y - r.lo.y, r.hi.z - r.lo.z});
  require(std::isfinite(r.spacing_m) && r.spacing_m > 0, "region.spacing_m must be > 0");
  require(r.spacing_m <= edge, "region.spacing_m exceeds the smallest box edge");
}

void validate(const Scene& scene) {
  validate(scene.system);
  validate(scene.building);
  validate(scene.region);
  require(scene.region.hi.y < 0, "region: anchors must lie outside the front wall (hi.y < 0)");
  require(!scene.targets.empty(), "targets: at least one target required");
  const auto& b = scene.building;
  const double L = b.half_length_m;
  for (std::size_t i = 0; i < scene.targets.size(); ++i) {
    const Vec3& t = scene.targets[i];
    const std::string where = "targets[" + std::to_string(i) + "]";
    require(is_finite(t), where + ": coordinates must be finite");
    require(t.y > 0, where + ": target must be inside the building (y > 0)");
    require(t.y <= 2.0 * L && std::abs(t.x) <= L, where + ": target outside the building footprint");
    const double f = (t.z - b.floor_height_m / 2.0) / b.floor_height_m + 1.0;
    const double nearest = std::round(f);
    require(nearest >= 1 && nearest <= b.num_floors &&
                std::abs(t.z - b.floor_plane_z(static_cast<int>(nearest))) <= 1e-6,
            where + ": z is not on a floor plane (z = (f-1)h + h/2)");
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

class Reader {
 public:
  Reader(const json& obj, std::string path, std::set<std::string> allowed)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ParseError(path_ + ": expected an object");
    for (const auto& [key, _] : obj_.items()) {
      if (!allowed.count(key)) throw ParseError(path_ + "." + key + ": unknown field");
    }
  }

  void number(const char* key, double& out) const {
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ParseError(field(key) + ": expected a number");
    out = v.get<double>();
  }

  void integer(const char* key, int& out) const {
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ParseError(field(key) + ": expected an integer");
    out = v.get<int>();
  }

  void vec3(const char* key, Vec3& out) const {
    if (!obj_.contains(key)) return;
    out = parse_vec3(obj_.at(key), field(key));
  }

  std::string field(const char* key) const { return path_ + "." + key; }

  static Vec3 parse_vec3(const json& v, const std::string& where) {
    if (v.is_array()) {
      if (v.size() != 3) throw ParseError(where + ": expected [x, y, z]");
      for (const auto& c : v)
        if (!c.is_number()) throw ParseError(where + ": coordinates must be numbers");
      return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    }
    if (v.is_object()) {
      Vec3 out;
      Reader r(v, where, {"x", "y", "z"});
      for (const char* k : {"x", "y", "z"})
        if (!v.contains(k)) throw ParseError(where + "." + k + ": missing");
      r.number("x", out.x);
      r.number("y", out.y);
      r.number("z", out.z);
      return out;
    }
    throw ParseError(where + ": expected [x, y, z] or {x, y, z}");
  }

 private:
  const json& obj_;
  std::string path_;
};

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

Scene load_scene(std::string_view config_text) {
  json doc;
  try {
    doc = json::parse(config_text.begin(), config_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what());
  }
  Reader top(doc, "config", {"system", "building", "region", "targets", "target_floors"});

  Scene scene;
  if (doc.contains("system")) {
    Reader r(doc["system"], "system",
             {"bandwidth_hz", "tx_power_dbm", "tx_gain_dbi", "rx_gain_dbi", "carrier_hz",
              "noise_figure_db", "noise_temp_k", "ked_mode"});
    auto& s = scene.system;
    r.number("bandwidth_hz", s.bandwidth_hz);
    r.number("tx_power_dbm", s.tx_power_dbm);
    r.number("tx_gain_dbi", s.tx_gain_dbi);
    r.number("rx_gain_dbi", s.rx_gain_dbi);
    r.number("carrier_hz", s.carrier_hz);
    r.number("noise_figure_db", s.noise_figure_db);
    r.number("noise_temp_k", s.noise_temp_k);
    if (doc["system"].contains("ked_mode")) {
      const json& m = doc["system"]["ked_mode"];
      if (!m.is_string()) throw ParseError("system.ked_mode: expected a string");
      s.ked_mode = ked_mode_from_string(m.get<std::string>());
    }
  }
  if (doc.contains("building")) {
    Reader r(doc["building"], "building",
             {"half_length_m", "num_floors", "floor_height_m", "window_half_height_m"});
    auto& b = scene.building;
    r.number("half_length_m", b.half_length_m);
    r.integer("num_floors", b.num_floors);
    r.number("floor_height_m", b.floor_height_m);
    r.number("window_half_height_m", b.window_half_height_m);
  }
  validate(scene.building);

  scene.region = AnchorRegion::for_building(scene.building, 5.0);
  if (doc.contains("region")) {
    Reader r(doc["region"], "region", {"lo", "hi", "spacing_m"});
    r.vec3("lo", scene.region.lo);
    r.vec3("hi", scene.region.hi);
    r.number("spacing_m", scene.region.spacing_m);
  }

  if (doc.contains("targets") && doc.contains("target_floors")) {
    throw ParseError("config.target_floors: cannot be combined with explicit targets");
  }
  if (doc.contains("targets")) {
    const json& t = doc["targets"];
    if (!t.is_array()) throw ParseError("config.targets: expected an array");
    for (std::size_t i = 0; i < t.size(); ++i) {
      scene.targets.push_back(Reader::parse_vec3(t[i], "targets[" + std::to_string(i) + "]"));
    }
  } else {
    std::vector<int> floors;
    if (doc.contains("target_floors")) {
      const json& f = doc["target_floors"];
      if (!f.is_array()) throw ParseError("config.target_floors: expected an array of integers");
      for (const auto& v : f) {
        if (!v.is_number_integer())
          throw ParseError("config.target_floors: expected an array of integers");
        floors.push_back(v.get<int>());
      }
    } else {
      for (int i = 1; i <= scene.building.num_floors; ++i) floors.push_back(i);
    }
    try {
      scene.targets = default_targets(scene.building, floors);
    } catch (const DomainError& e) {
      throw ValidationError(std::string("config.target_floors: ") + e.what());
    }
  }
  validate(scene);
  return scene;
}

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_scene(text);
}

json scene_to_json(const Scene& scene) {
  const auto& s = scene.system;
  const auto& b = scene.building;
  json targets = json::array();
  for (const auto& t : scene.targets) targets.push_back(vec3_json(t));
  return json{
      {"system",
       {{"bandwidth_hz", s.bandwidth_hz},
        {"tx_power_dbm", s.tx_power_dbm},
        {"tx_gain_dbi", s.tx_gain_dbi},
        {"rx_gain_dbi", s.rx_gain_dbi},
        {"carrier_hz", s.carrier_hz},
        {"noise_figure_db", s.noise_figure_db},
        {"noise_temp_k", s.noise_temp_k},
        {"ked_mode", std::string(to_string(s.ked_mode))}}},
      {"building",
       {{"half_length_m", b.half_length_m},
        {"num_floors", b.num_floors},
        {"floor_height_m", b.floor_height_m},
        {"window_half_height_m", b.window_half_height_m}}},
      {"region",
       {{"lo", vec3_json(scene.region.lo)},
        {"hi", vec3_json(scene.region.hi)},
        {"spacing_m", scene.region.spacing_m}}},
      {"targets", targets},
  };
}

std::uint64_t scene_hash(const Scene& scene) {
  const std::string text = scene_to_json(scene).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Targets and candidate grid

std::vector<Vec3> default_targets(const BuildingGeometry& building, const std::vector<int>& floors) {
  if (floors.empty()) throw DomainError("default_targets: floor list is empty");
  const double L = building.half_length_m;
  std::vector<Vec3> out;
  out.reserve(4 * floors.size());
  for (int f : floors) {
    if (f < 1 || f > building.num_floors) {
      throw DomainError("default_targets: floor " + std::to_string(f) + " outside [1, " +
                        std::to_string(building.num_floors) + "]");
    }
    const double z = building.floor_plane_z(f);
    for (double x : {-L / 2.0, L / 2.0})
      for (double y : {L / 2.0, 3.0 * L / 2.0}) out.push_back({x, y, z});
  }
  return out;
}

std::array<std::size_t, 3> grid_axis_counts(const AnchorRegion& region) {
  const double d = region.spacing_m;
  auto count = [d](double lo, double hi) {
    // Tolerance keeps an exactly divisible extent from losing its end point.
    return static_cast<std::size_t>(std::floor((hi - lo) / d + 1e-9)) + 1;
  };
  return {count(region.lo.x, region.hi.x), count(region.lo.y, region.hi.y),
          count(region.lo.z, region.hi.z)};
}

namespace {

double wrap(double v, double lo, double hi) {
  if (v >= lo && v <= hi) return v;
  const double extent = hi - lo;
  double m = std::fmod(v - lo, extent);
  if (m < 0) m += extent;
  return lo + m;
}

}  // namespace

std::vector<Vec3> generate_anchor_grid(const AnchorRegion& region, const Vec3& shift) {
  validate(region);
  const double half = region.spacing_m / 2.0;
  if (!(std::abs(shift.x) <= half && std::abs(shift.y) <= half && std::abs(shift.z) <= half)) {
    throw DomainError("generate_anchor_grid: shift components must satisfy |s| <= d/2");
  }
  const auto [nx, ny, nz] = grid_axis_counts(region);
  const double d = region.spacing_m;
  std::vector<Vec3> out;
  out.reserve(nx * ny * nz);
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = wrap(region.lo.x + i * d + shift.x, region.lo.x, region.hi.x);
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = wrap(region.lo.y + j * d + shift.y, region.lo.y, region.hi.y);
      for (std::size_t k = 0; k < nz; ++k) {
        const double z = wrap(region.lo.z + k * d + shift.z, region.lo.z, region.hi.z);
        out.push_back({x, y, z});
      }
    }
  }
  return out;
}

Vec3 draw_shift(std::uint64_t seed, double spacing_m) {
  if (!(spacing_m > 0)) throw DomainError("draw_shift: spacing must be > 0");
  Rng rng(seed);
  const double h = spacing_m / 2.0;
  Vec3 s;
  s.x = rng.uniform(-h, h);
  s.y = rng.uniform(-h, h);
  s.z = rng.uniform(-h, h);
  return s;
}

}  // namespace anchoropt
