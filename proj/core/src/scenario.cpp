#include "coexsim/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace coexsim::sim {

namespace {

constexpr std::array<std::pair<CoexMode, std::string_view>, 8> kModeNames{{
    {CoexMode::only_11p, "only-11p"},
    {CoexMode::only_lte, "only-lte"},
    {CoexMode::legacy, "legacy"},
    {CoexMode::legacy_periodic, "legacy-periodic"},
    {CoexMode::preamble, "preamble"},
    {CoexMode::preamble_noharq, "preamble-noharq"},
    {CoexMode::preamble_halfpool, "preamble-halfpool"},
    {CoexMode::preamble_modcc, "preamble-modcc"},
}};

constexpr double kEps = 1e-9;

}  // namespace

std::string_view to_string(Tech t) { return t == Tech::dot11p ? "11p" : "lte"; }

std::string_view to_string(CoexMode m) {
  for (const auto& [mode, name] : kModeNames)
    if (mode == m) return name;
  return "?";
}

std::optional<CoexMode> parse_mode(std::string_view name) {
  for (const auto& [mode, n] : kModeNames)
    if (n == name) return mode;
  return std::nullopt;
}

std::vector<CoexMode> all_modes() {
  std::vector<CoexMode> out;
  for (const auto& entry : kModeNames) out.push_back(entry.first);
  return out;
}

ModeTraits traits(CoexMode mode) {
  ModeTraits t;
  switch (mode) {
    case CoexMode::only_11p:
      t.has_lte = false;
      break;
    case CoexMode::only_lte:
      t.has_11p = false;
      t.lte.preamble_insertion = true;
      break;
    case CoexMode::legacy:
      break;
    case CoexMode::legacy_periodic:
      t.periodic = true;
      break;
    case CoexMode::preamble:
      t.lte.preamble_insertion = true;
      break;
    case CoexMode::preamble_noharq:
      t.lte.preamble_insertion = true;
      t.lte.harq = false;
      break;
    case CoexMode::preamble_halfpool:
      t.lte.preamble_insertion = true;
      t.lte.pool = lte::PoolKind::half;
      break;
    case CoexMode::preamble_modcc:
      t.lte.preamble_insertion = true;
      t.lte.cc_variant = lte::CcVariant::modified;
      break;
  }
  return t;
}

void ScenarioConfig::validate() const {
  if (!(road_length_m > 0.0)) throw std::invalid_argument("road length must be positive");
  if (lanes_per_direction <= 0) throw std::invalid_argument("need at least one lane per direction");
  if (density_11p_per_km < 0.0 || density_lte_per_km < 0.0)
    throw std::invalid_argument("densities must be non-negative");
  if (density_11p_per_km == 0.0 && density_lte_per_km == 0.0)
    throw std::invalid_argument("empty run: both densities are zero");
  if (!(speed_mean_kmh > 0.0) || speed_std_kmh < 0.0) throw std::invalid_argument("bad speed model");
}

double Scenario::position(std::uint32_t id, double t_s) const {
  const auto& v = vehicles[id];
  double x = v.x0_m + v.velocity_mps * t_s;
  if (config.wraparound) {
    x = std::fmod(x, config.road_length_m);
    if (x < 0.0) x += config.road_length_m;
  }
  return x;
}

double Scenario::distance(std::uint32_t a, std::uint32_t b, double t_s) const {
  double dx = std::abs(position(a, t_s) - position(b, t_s));
  if (config.wraparound) dx = std::min(dx, config.road_length_m - dx);
  const double dy = vehicles[a].y_m - vehicles[b].y_m;
  return std::sqrt(dx * dx + dy * dy);
}

std::size_t Scenario::count(Tech t) const {
  return static_cast<std::size_t>(
      std::count_if(vehicles.begin(), vehicles.end(), [t](const Vehicle& v) { return v.tech == t; }));
}

Scenario generate_scenario(const ScenarioConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  Scenario sc;
  sc.config = cfg;
  const int lanes = 2 * cfg.lanes_per_direction;
  std::uniform_real_distribution<double> along(0.0, cfg.road_length_m);
  std::uniform_int_distribution<int> pick_lane(0, lanes - 1);
  std::normal_distribution<double> speed(cfg.speed_mean_kmh / 3.6, cfg.speed_std_kmh / 3.6);

  auto draw_speed = [&] {
    double v = 0.0;
    do v = speed(rng); while (!(v > 0.0));
    return v;
  };
  auto add = [&](Tech tech, double x, int lane) {
    Vehicle v;
    v.id = static_cast<std::uint32_t>(sc.vehicles.size());
    v.tech = tech;
    v.lane = lane;
    v.x0_m = x;
    v.y_m = cfg.lane_width_m * (lane + 0.5);
    v.velocity_mps = lane < cfg.lanes_per_direction ? draw_speed() : -draw_speed();
    sc.vehicles.push_back(v);
  };

  for (auto [tech, density] : {std::pair{Tech::dot11p, cfg.density_11p_per_km},
                               std::pair{Tech::lte, cfg.density_lte_per_km}}) {
    if (density <= 0.0) continue;
    if (cfg.placement == Placement::uniform) {
      const auto n = static_cast<long>(std::lround(density * cfg.road_length_m / 1000.0));
      for (long i = 0; i < n; ++i) {
        const double x = along(rng);
        add(tech, x, pick_lane(rng));
      }
    } else {
      std::exponential_distribution<double> gap(density / 1000.0);
      for (double x = gap(rng); x < cfg.road_length_m; x += gap(rng)) add(tech, x, 0);
    }
  }
  if (sc.vehicles.empty()) throw std::invalid_argument("scenario holds no vehicle");
  return sc;
}

bool cam_trigger_check(const CamConfig& cfg, const CamTriggerState& st, double odometer_m,
                       double speed_mps, SimTime now, double extra_interval_s) {
  if (st.last_generation == kNever) return true;
  const double dt = to_seconds(now - st.last_generation);
  if (cfg.periodic) return dt >= std::max(cfg.periodic_interval_s, extra_interval_s) - kEps;
  const bool dynamics = std::abs(odometer_m - st.last_odometer_m) >= cfg.position_threshold_m - kEps ||
                        std::abs(speed_mps - st.last_speed_mps) >= cfg.speed_threshold_mps - kEps ||
                        dt >= cfg.max_interval_s - kEps;
  return dynamics && dt >= std::max(cfg.min_interval_s, extra_interval_s) - kEps;
}

SimTime next_cam_time(const CamConfig& cfg, const CamTriggerState& st, double speed_mps,
                      double extra_interval_s, SimTime not_before) {
  const auto grid = from_seconds(cfg.check_period_s);
  auto ceil_grid = [grid](SimTime t) {
    const auto n = (t.count() + grid.count() - 1) / grid.count();
    return SimTime(n * grid.count());
  };
  if (st.last_generation == kNever) return ceil_grid(not_before);
  double need = 0.0;
  if (cfg.periodic) {
    need = std::max(cfg.periodic_interval_s, extra_interval_s);
  } else {
    double trigger = cfg.max_interval_s;
    if (speed_mps > 0.0) trigger = std::min(trigger, cfg.position_threshold_m / speed_mps);
    need = std::max(trigger, std::max(cfg.min_interval_s, extra_interval_s));
  }
  return std::max(ceil_grid(st.last_generation + from_seconds(need)), ceil_grid(not_before));
}

}  // namespace coexsim::sim
