#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coexsim::cli {

using nlohmann::json;

namespace {

std::vector<double> arange(double from, double to, double step) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(from + step * static_cast<double>(i));
  return out;
}

SimCase fig5_case(bool preamble) {
  return {preamble ? "only-lte-preamble" : "only-lte-legacy", sim::CoexMode::only_lte, preamble};
}

template <class T>
void get(const json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

void get_us(const json& j, const char* key, SimTime& field) {
  if (j.contains(key)) field = from_seconds(j.at(key).get<double>() * 1e-6);
}

double us(SimTime t) { return to_seconds(t) * 1e6; }

json scenario_json(const sim::ScenarioConfig& s) {
  return {{"road_length_m", s.road_length_m},
          {"lanes_per_direction", s.lanes_per_direction},
          {"lane_width_m", s.lane_width_m},
          {"density_11p_per_km", s.density_11p_per_km},
          {"density_lte_per_km", s.density_lte_per_km},
          {"speed_mean_kmh", s.speed_mean_kmh},
          {"speed_std_kmh", s.speed_std_kmh},
          {"wraparound", s.wraparound},
          {"placement", s.placement == sim::Placement::uniform ? "uniform" : "ppp"}};
}

void scenario_from(const json& j, sim::ScenarioConfig& s) {
  get(j, "road_length_m", s.road_length_m);
  get(j, "lanes_per_direction", s.lanes_per_direction);
  get(j, "lane_width_m", s.lane_width_m);
  get(j, "density_11p_per_km", s.density_11p_per_km);
  get(j, "density_lte_per_km", s.density_lte_per_km);
  get(j, "speed_mean_kmh", s.speed_mean_kmh);
  get(j, "speed_std_kmh", s.speed_std_kmh);
  get(j, "wraparound", s.wraparound);
  if (j.contains("placement")) {
    const auto p = j.at("placement").get<std::string>();
    if (p != "uniform" && p != "ppp") throw std::invalid_argument("placement must be uniform or ppp");
    s.placement = p == "ppp" ? sim::Placement::ppp : sim::Placement::uniform;
  }
}

json radio_json(const propagation::RadioConfig& r) {
  return {{"tx_power_density_dbm_per_mhz", r.tx_power_density_dbm_per_mhz},
          {"bandwidth_mhz", r.bandwidth_mhz},
          {"antenna_gain_tx_db", r.antenna_gain_tx_db},
          {"antenna_gain_rx_db", r.antenna_gain_rx_db},
          {"noise_figure_db", r.noise_figure_db},
          {"cca_energy_threshold_dbm", r.cca_energy_threshold_dbm},
          {"preamble_detect_threshold_dbm", r.preamble_detect_threshold_dbm},
          {"cbr_busy_threshold_11p_dbm", r.cbr_busy_threshold_11p_dbm},
          {"cbr_busy_threshold_lte_dbm", r.cbr_busy_threshold_lte_dbm},
          {"sps_sensing_threshold_dbm", r.sps_sensing_threshold_dbm}};
}

void radio_from(const json& j, propagation::RadioConfig& r) {
  get(j, "tx_power_density_dbm_per_mhz", r.tx_power_density_dbm_per_mhz);
  get(j, "bandwidth_mhz", r.bandwidth_mhz);
  get(j, "antenna_gain_tx_db", r.antenna_gain_tx_db);
  get(j, "antenna_gain_rx_db", r.antenna_gain_rx_db);
  get(j, "noise_figure_db", r.noise_figure_db);
  get(j, "cca_energy_threshold_dbm", r.cca_energy_threshold_dbm);
  get(j, "preamble_detect_threshold_dbm", r.preamble_detect_threshold_dbm);
  get(j, "cbr_busy_threshold_11p_dbm", r.cbr_busy_threshold_11p_dbm);
  get(j, "cbr_busy_threshold_lte_dbm", r.cbr_busy_threshold_lte_dbm);
  get(j, "sps_sensing_threshold_dbm", r.sps_sensing_threshold_dbm);
}

json path_loss_json(const propagation::PathLossModel& m) {
  return {{"alpha_db", m.alpha()}, {"beta", m.beta()}};
}

void path_loss_from(const json& j, propagation::PathLossModel& m) {
  double a = m.alpha(), b = m.beta();
  get(j, "alpha_db", a);
  get(j, "beta", b);
  m = propagation::PathLossModel(a, b);
}

json per_json(const propagation::PerCurve& c) {
  return {{"sinr_50_db", c.sinr_50_db}, {"slope_per_db", c.slope_per_db}, {"label", c.label}};
}

void per_from(const json& j, propagation::PerCurve& c) {
  get(j, "sinr_50_db", c.sinr_50_db);
  get(j, "slope_per_db", c.slope_per_db);
  get(j, "label", c.label);
}

json sim_json(const sim::SimConfig& s) {
  json j;
  j["scenario"] = scenario_json(s.scenario);
  if (s.preamble_insertion) j["preamble_insertion"] = *s.preamble_insertion;
  j["duration_s"] = s.duration_s;
  j["warmup_s"] = s.warmup_s;
  j["payload_bytes"] = s.payload_bytes;
  j["radio"] = radio_json(s.radio);
  j["path_loss"] = path_loss_json(s.path_loss);
  j["shadowing"] = {{"std_dev_db", s.shadowing.std_dev_db},
                    {"decorrelation_distance_m", s.shadowing.decorrelation_distance_m}};
  j["per_11p"] = per_json(s.per_11p);
  j["per_lte"] = per_json(s.per_lte);
  const auto& d = s.dot11p;
  j["dot11p"] = {{"aifs_us", us(d.aifs)},
                 {"slot_us", us(d.slot)},
                 {"cw_max_slots", d.cw_max_slots},
                 {"cca_energy_threshold_dbm", d.cca_energy_threshold_dbm},
                 {"preamble_detect_threshold_dbm", d.preamble_detect_threshold_dbm},
                 {"preamble_sinr_threshold_db", d.preamble_sinr_threshold_db},
                 {"cbr_busy_threshold_dbm", d.cbr_busy_threshold_dbm},
                 {"cbr_window_us", us(d.cbr_window)},
                 {"data_rate_mbps", d.data_rate_mbps},
                 {"preamble_duration_us", us(d.preamble_duration)},
                 {"symbol_us", us(d.symbol)}};
  j["dcc_t_g_s"] = s.dcc_t_g_s;
  const auto& g = s.grid;
  j["grid"] = {{"tti_us", us(g.tti)},
               {"subchannels", g.subchannels},
               {"subchannel_prbs", g.subchannel_prbs},
               {"subchannels_per_packet", g.subchannels_per_packet},
               {"prb_mhz", g.prb_mhz},
               {"lower_guard_mhz", g.lower_guard_mhz},
               {"half_pool_period", g.half_pool_period},
               {"half_pool_active", g.half_pool_active}};
  const auto& p = s.sps;
  j["sps"] = {{"rri_ms", p.rri_ms},
              {"counter_min", p.counter_min},
              {"counter_max", p.counter_max},
              {"keep_probability", p.keep_probability},
              {"best_fraction", p.best_fraction},
              {"min_candidate_fraction", p.min_candidate_fraction},
              {"rsrp_threshold_dbm", p.rsrp_threshold_dbm},
              {"relax_step_db", p.relax_step_db},
              {"harq_window_ttis", p.harq_window_ttis},
              {"rssi_periods", p.rssi_periods}};
  j["lte_cbr_threshold_dbm"] = s.lte_cbr_threshold_dbm;
  const auto& c = s.cam;
  j["cam"] = {{"min_interval_s", c.min_interval_s},
              {"max_interval_s", c.max_interval_s},
              {"position_threshold_m", c.position_threshold_m},
              {"speed_threshold_mps", c.speed_threshold_mps},
              {"check_period_s", c.check_period_s},
              {"periodic_interval_s", c.periodic_interval_s}};
  j["prr_bin_m"] = s.prr_bin_m;
  j["prr_max_range_m"] = s.prr_max_range_m;
  j["da_range_m"] = s.da_range_m;
  return j;
}

void sim_from(const json& j, sim::SimConfig& s) {
  if (j.contains("scenario")) scenario_from(j.at("scenario"), s.scenario);
  if (j.contains("preamble_insertion")) s.preamble_insertion = j.at("preamble_insertion").get<bool>();
  get(j, "duration_s", s.duration_s);
  get(j, "warmup_s", s.warmup_s);
  get(j, "payload_bytes", s.payload_bytes);
  if (j.contains("radio")) radio_from(j.at("radio"), s.radio);
  if (j.contains("path_loss")) path_loss_from(j.at("path_loss"), s.path_loss);
  if (j.contains("shadowing")) {
    get(j.at("shadowing"), "std_dev_db", s.shadowing.std_dev_db);
    get(j.at("shadowing"), "decorrelation_distance_m", s.shadowing.decorrelation_distance_m);
  }
  if (j.contains("per_11p")) per_from(j.at("per_11p"), s.per_11p);
  if (j.contains("per_lte")) per_from(j.at("per_lte"), s.per_lte);
  if (j.contains("dot11p")) {
    const auto& d = j.at("dot11p");
    auto& o = s.dot11p;
    get_us(d, "aifs_us", o.aifs);
    get_us(d, "slot_us", o.slot);
    get(d, "cw_max_slots", o.cw_max_slots);
    get(d, "cca_energy_threshold_dbm", o.cca_energy_threshold_dbm);
    get(d, "preamble_detect_threshold_dbm", o.preamble_detect_threshold_dbm);
    get(d, "preamble_sinr_threshold_db", o.preamble_sinr_threshold_db);
    get(d, "cbr_busy_threshold_dbm", o.cbr_busy_threshold_dbm);
    get_us(d, "cbr_window_us", o.cbr_window);
    get(d, "data_rate_mbps", o.data_rate_mbps);
    get_us(d, "preamble_duration_us", o.preamble_duration);
    get_us(d, "symbol_us", o.symbol);
  }
  get(j, "dcc_t_g_s", s.dcc_t_g_s);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    get_us(g, "tti_us", s.grid.tti);
    get(g, "subchannels", s.grid.subchannels);
    get(g, "subchannel_prbs", s.grid.subchannel_prbs);
    get(g, "subchannels_per_packet", s.grid.subchannels_per_packet);
    get(g, "prb_mhz", s.grid.prb_mhz);
    get(g, "lower_guard_mhz", s.grid.lower_guard_mhz);
    get(g, "half_pool_period", s.grid.half_pool_period);
    get(g, "half_pool_active", s.grid.half_pool_active);
  }
  if (j.contains("sps")) {
    const auto& p = j.at("sps");
    get(p, "rri_ms", s.sps.rri_ms);
    get(p, "counter_min", s.sps.counter_min);
    get(p, "counter_max", s.sps.counter_max);
    get(p, "keep_probability", s.sps.keep_probability);
    get(p, "best_fraction", s.sps.best_fraction);
    get(p, "min_candidate_fraction", s.sps.min_candidate_fraction);
    get(p, "rsrp_threshold_dbm", s.sps.rsrp_threshold_dbm);
    get(p, "relax_step_db", s.sps.relax_step_db);
    get(p, "harq_window_ttis", s.sps.harq_window_ttis);
    get(p, "rssi_periods", s.sps.rssi_periods);
  }
  get(j, "lte_cbr_threshold_dbm", s.lte_cbr_threshold_dbm);
  if (j.contains("cam")) {
    const auto& c = j.at("cam");
    get(c, "min_interval_s", s.cam.min_interval_s);
    get(c, "max_interval_s", s.cam.max_interval_s);
    get(c, "position_threshold_m", s.cam.position_threshold_m);
    get(c, "speed_threshold_mps", s.cam.speed_threshold_mps);
    get(c, "check_period_s", s.cam.check_period_s);
    get(c, "periodic_interval_s", s.cam.periodic_interval_s);
  }
  get(j, "prr_bin_m", s.prr_bin_m);
  get(j, "prr_max_range_m", s.prr_max_range_m);
  get(j, "da_range_m", s.da_range_m);
}

json free_flow_json(const analytic::FreeFlowParams& f) {
  return {{"lambda", f.lambda},
          {"link_distance_m", f.link_distance_m},
          {"t_pck_s", f.t_pck_s},
          {"t_tti_s", f.t_tti_s},
          {"sense_threshold_dbm", f.sense_threshold_dbm},
          {"sinr_threshold_db", f.sinr_threshold_db},
          {"lte_bandwidth_mhz", f.lte_bandwidth_mhz},
          {"radio", radio_json(f.radio)},
          {"path_loss", path_loss_json(f.path_loss)}};
}

void free_flow_from(const json& j, analytic::FreeFlowParams& f) {
  get(j, "lambda", f.lambda);
  get(j, "link_distance_m", f.link_distance_m);
  get(j, "t_pck_s", f.t_pck_s);
  get(j, "t_tti_s", f.t_tti_s);
  get(j, "sense_threshold_dbm", f.sense_threshold_dbm);
  get(j, "sinr_threshold_db", f.sinr_threshold_db);
  get(j, "lte_bandwidth_mhz", f.lte_bandwidth_mhz);
  if (j.contains("radio")) radio_from(j.at("radio"), f.radio);
  if (j.contains("path_loss")) path_loss_from(j.at("path_loss"), f.path_loss);
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::analytic_distance:
      return "analytic-distance";
    case ExperimentKind::analytic_lambda:
      return "analytic-lambda";
    case ExperimentKind::simulation:
      return "simulation";
  }
  return "?";
}

SimCase make_case(sim::CoexMode mode) { return {std::string(sim::to_string(mode)), mode, std::nullopt}; }

void RunConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (workers == 0) throw std::invalid_argument("workers must be positive");
  if (kind == ExperimentKind::simulation) {
    if (cases.empty() || densities.empty()) throw std::invalid_argument("nothing to simulate");
    for (double d : densities)
      if (!(d > 0.0)) throw std::invalid_argument("densities must be positive");
    sim.radio.validate();
  } else {
    if (sweep.empty() || thresholds_dbm.empty()) throw std::invalid_argument("empty analytic sweep");
    free_flow.validate();
    if (mc_trials == 0) throw std::invalid_argument("mc_trials must be positive");
  }
}

std::vector<std::string> preset_names() {
  return {"fig4a", "fig4b", "fig5", "fig6", "fig7", "table2", "custom"};
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "fig4a") {
    c.kind = ExperimentKind::analytic_distance;
    c.free_flow.lambda = 1.0;
    c.sweep = arange(10.0, 500.0, 10.0);
  } else if (name == "fig4b") {
    c.kind = ExperimentKind::analytic_lambda;
    c.free_flow.link_distance_m = 200.0;
    c.sweep = arange(0.1, 3.0, 0.1);
  } else if (name == "fig5") {
    c.cases = {fig5_case(false), fig5_case(true)};
    c.densities = {100.0, 200.0};
  } else if (name == "fig6") {
    c.cases = {make_case(sim::CoexMode::only_11p), make_case(sim::CoexMode::only_lte),
               make_case(sim::CoexMode::legacy), make_case(sim::CoexMode::legacy_periodic),
               make_case(sim::CoexMode::preamble)};
    c.densities = {50.0};
  } else if (name == "fig7") {
    c.cases = {make_case(sim::CoexMode::legacy), make_case(sim::CoexMode::preamble),
               make_case(sim::CoexMode::preamble_noharq), make_case(sim::CoexMode::preamble_halfpool),
               make_case(sim::CoexMode::preamble_modcc)};
    c.densities = {50.0, 100.0, 150.0};
  } else if (name == "table2") {
    c.cases.clear();
    for (auto m : sim::all_modes()) c.cases.push_back(make_case(m));
    c.densities = {50.0, 100.0, 150.0};
  } else if (name != "custom") {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + name + "' (known: " + known + ")");
  }
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["kind"] = to_string(c.kind);
  j["seeds"] = c.seeds;
  j["out_dir"] = c.out_dir.string();
  j["check"] = c.check;
  j["render"] = c.render;
  if (c.kind == ExperimentKind::simulation) {
    json cases = json::array();
    for (const auto& k : c.cases) {
      json e{{"label", k.label}, {"mode", std::string(sim::to_string(k.mode))}};
      if (k.preamble) e["preamble_insertion"] = *k.preamble;
      cases.push_back(e);
    }
    j["cases"] = cases;
    j["densities_per_km"] = c.densities;
    j["sim"] = sim_json(c.sim);
  } else {
    j["sweep"] = c.sweep;
    j["thresholds_dbm"] = c.thresholds_dbm;
    j["mc_trials"] = c.mc_trials;
    j["quadrature"] = {{"panels", c.quadrature.panels},
                       {"tail_mass", c.quadrature.tail_mass},
                       {"max_refinement_delta", c.quadrature.max_refinement_delta}};
    j["free_flow"] = free_flow_json(c.free_flow);
  }
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c = preset(j.value("preset", std::string("custom")));
  get(j, "seeds", c.seeds);
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  get(j, "check", c.check);
  get(j, "render", c.render);
  if (j.contains("cases")) {
    c.cases.clear();
    for (const auto& e : j.at("cases")) {
      const auto mode_name = e.at("mode").get<std::string>();
      const auto mode = sim::parse_mode(mode_name);
      if (!mode) throw std::invalid_argument("unknown mode '" + mode_name + "'");
      SimCase k{e.value("label", mode_name), *mode, std::nullopt};
      if (e.contains("preamble_insertion")) k.preamble = e.at("preamble_insertion").get<bool>();
      c.cases.push_back(k);
    }
  }
  get(j, "densities_per_km", c.densities);
  if (j.contains("sim")) sim_from(j.at("sim"), c.sim);
  get(j, "sweep", c.sweep);
  get(j, "thresholds_dbm", c.thresholds_dbm);
  get(j, "mc_trials", c.mc_trials);
  if (j.contains("quadrature")) {
    const auto& q = j.at("quadrature");
    get(q, "panels", c.quadrature.panels);
    get(q, "tail_mass", c.quadrature.tail_mass);
    get(q, "max_refinement_delta", c.quadrature.max_refinement_delta);
  }
  if (j.contains("free_flow")) free_flow_from(j.at("free_flow"), c.free_flow);
  c.validate();
  return c;
}

}  // namespace coexsim::cli
