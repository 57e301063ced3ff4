#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace anchoropt {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a, const Vec3& b);
double norm(const Vec3& v);
bool is_finite(const Vec3& v);

// Link-model switch for the knife-edge term on the target's floor plane.
enum class KedMode {
  kFloorLos,       // zero excess loss when |z_k - z_n| <= 1 mm
  kContinuous,  // L_d(nu) applied everywhere
};

std::string_view to_string(KedMode mode);
KedMode ked_mode_from_string(std::string_view name);

/// RF system parameters. Defaults are the simulation values used throughout.
struct SystemParams {
  double bandwidth_hz = 200e6;
  double tx_power_dbm = 30.0;
  double tx_gain_dbi = 10.0;
  double rx_gain_dbi = 10.0;
  double carrier_hz = 10e9;
  double noise_figure_db = 5.0;
  double noise_temp_k = 290.0;
  KedMode ked_mode = KedMode::kFloorLos;
};

/// Building footprint is [-L, L] x [0, 2L]; the front wall is the plane y = 0.
struct BuildingGeometry {
  double half_length_m = 15.0;
  int num_floors = 10;
  double floor_height_m = 3.0;
  double window_half_height_m = 0.0;

  /// Height of the target plane on floor `floor` (1-based).
  double floor_plane_z(int floor) const;
};

/// Axis-aligned box of candidate anchor positions, sampled every spacing_m.
struct AnchorRegion {
  Vec3 lo{-15.0, -30.0, 0.0};
  Vec3 hi{15.0, -15.0, 15.0};
  double spacing_m = 5.0;

  /// Box matching the building: [-L, -2L, 0] <= A <= [L, -L, L].
  static AnchorRegion for_building(const BuildingGeometry& building, double spacing_m);
};

struct Scene {
  SystemParams system;
  BuildingGeometry building;
  AnchorRegion region;
  std::vector<Vec3> targets;
};

void validate(const SystemParams& system);
void validate(const BuildingGeometry& building);
void validate(const AnchorRegion& region);
/// Checks every invariant of the scene and its parts; throws ValidationError.
void validate(const Scene& scene);

/// Parses and validates a JSON scenario document.
Scene load_scene(std::string_view config_text);
Scene load_scene_file(const std::string& path);
nlohmann::json scene_to_json(const Scene& scene);
/// Stable 64-bit FNV-1a hash of the canonical JSON form.
std::uint64_t scene_hash(const Scene& scene);

/// Four targets per listed floor at the floor-plate quadrant centres,
/// floor-major, then x, then y.
std::vector<Vec3> default_targets(const BuildingGeometry& building, const std::vector<int>& floors);

/// Per-axis candidate counts floor((hi - lo) / d) + 1.
std::array<std::size_t, 3> grid_axis_counts(const AnchorRegion& region);

/// Uniform grid anchored at lo, translated by `shift` and wrapped back into the
/// box coordinate-wise. Ordering is x-major, then y, then z.
std::vector<Vec3> generate_anchor_grid(const AnchorRegion& region, const Vec3& shift);

/// Cranley-Patterson shift with components i.i.d. U([-d/2, d/2]).
Vec3 draw_shift(std::uint64_t seed, double spacing_m);

}  // namespace anchoropt
