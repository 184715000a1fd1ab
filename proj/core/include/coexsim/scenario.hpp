#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "coexsim/ltev2x.hpp"
#include "coexsim/units.hpp"

namespace coexsim::sim {

enum class Tech : std::uint8_t { dot11p, lte };

enum class CoexMode {
  only_11p,
  only_lte,
  legacy,
  legacy_periodic,
  preamble,
  preamble_noharq,
  preamble_halfpool,
  preamble_modcc,
};

std::string_view to_string(Tech t);
std::string_view to_string(CoexMode m);
std::optional<CoexMode> parse_mode(std::string_view name);
std::vector<CoexMode> all_modes();

struct ModeTraits {
  bool has_11p = true;
  bool has_lte = true;
  bool periodic = false;
  lte::LteTxOptions lte;
};
ModeTraits traits(CoexMode mode);

enum class Placement { uniform, ppp };

struct ScenarioConfig {
  double road_length_m = 2000.0;
  int lanes_per_direction = 3;
  double lane_width_m = 4.0;
  double density_11p_per_km = 50.0;
  double density_lte_per_km = 50.0;
  double speed_mean_kmh = 70.0;
  double speed_std_kmh = 7.0;
  bool wraparound = true;
  Placement placement = Placement::uniform;

  void validate() const;
};

struct Vehicle {
  std::uint32_t id = 0;
  Tech tech = Tech::dot11p;
  int lane = 0;
  double x0_m = 0.0;
  double velocity_mps = 0.0;  // signed by travel direction
  double y_m = 0.0;

  double speed() const { return velocity_mps < 0 ? -velocity_mps : velocity_mps; }
};

struct Scenario {
  ScenarioConfig config;
  std::vector<Vehicle> vehicles;

  double position(std::uint32_t id, double t_s) const;
  double distance(std::uint32_t a, std::uint32_t b, double t_s) const;
  std::size_t count(Tech t) const;
};

// Vehicles of each technology per the densities (ids: 802.11p first). In ppp
// mode both technologies share one lane and positions follow a 1-D Poisson
// process, so the counts are random.
Scenario generate_scenario(const ScenarioConfig& cfg, std::mt19937_64& rng);

struct CamConfig {
  double min_interval_s = 0.1;
  double max_interval_s = 1.0;
  double position_threshold_m = 4.0;
  double speed_threshold_mps = 0.5;
  double check_period_s = 0.001;
  bool periodic = false;
  double periodic_interval_s = 0.2;
};

struct CamTriggerState {
  SimTime last_generation = kNever;
  double last_odometer_m = 0.0;
  double last_speed_mps = 0.0;
};

// Generation rule evaluated at a check instant. `extra_interval_s` is the
// congestion-control spacing (DCC t_delta or the LTE stretched interval).
bool cam_trigger_check(const CamConfig& cfg, const CamTriggerState& st, double odometer_m,
                       double speed_mps, SimTime now, double extra_interval_s);

// First check instant at which cam_trigger_check fires for a vehicle at
// constant speed, on the check grid, not before `not_before`.
SimTime next_cam_time(const CamConfig& cfg, const CamTriggerState& st, double speed_mps,
                      double extra_interval_s, SimTime not_before);

}  // namespace coexsim::sim
