#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "experiment.hpp"
#include "run_config.hpp"

using namespace coexsim;
using namespace coexsim::cli;

namespace {

RunConfig tiny_sim() {
  auto c = preset("fig6");
  c.sim.duration_s = 0.5;
  c.sim.warmup_s = 0.5;
  c.densities = {20.0};
  c.seeds = {1, 2};
  c.cases = {make_case(sim::CoexMode::legacy), make_case(sim::CoexMode::preamble)};
  c.render = false;
  return c;
}

RunConfig tiny_analytic() {
  auto c = preset("fig4a");
  c.sweep = {100.0, 300.0};
  c.mc_trials = 20000;
  c.render = false;
  return c;
}

}  // namespace

TEST(Presets, Known) {
  for (const auto& n : preset_names()) {
    const auto c = preset(n);
    EXPECT_EQ(c.preset, n);
    EXPECT_NO_THROW(c.validate());
  }
  try {
    preset("nope");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("fig4a"), std::string::npos);
  }
}

TEST(Presets, Shapes) {
  const auto a = preset("fig4a");
  EXPECT_EQ(a.kind, ExperimentKind::analytic_distance);
  ASSERT_EQ(a.sweep.size(), 50u);
  EXPECT_EQ(a.sweep.front(), 10.0);
  EXPECT_EQ(a.sweep.back(), 500.0);
  EXPECT_EQ(a.free_flow.lambda, 1.0);
  EXPECT_EQ(a.thresholds_dbm.size(), 2u);
  EXPECT_EQ(preset("fig4b").kind, ExperimentKind::analytic_lambda);
  const auto f5 = preset("fig5");
  EXPECT_EQ(f5.densities, (std::vector<double>{100.0, 200.0}));
  ASSERT_EQ(f5.cases.size(), 2u);
  for (const auto& c : f5.cases) EXPECT_EQ(c.mode, sim::CoexMode::only_lte);
  EXPECT_NE(f5.cases[0].preamble, f5.cases[1].preamble);
  const auto t2 = preset("table2");
  EXPECT_EQ(t2.densities.size(), 3u);
  EXPECT_EQ(t2.cases.size(), 8u);
}

TEST(Presets, DefaultsMatchParameterTable) {
  const auto c = preset("custom");
  EXPECT_EQ(c.sim.radio.tx_power_density_dbm_per_mhz, 13.0);
  EXPECT_EQ(c.sim.radio.noise_figure_db, 6.0);
  EXPECT_EQ(c.sim.radio.cca_energy_threshold_dbm, -65.0);
  EXPECT_EQ(c.sim.radio.preamble_detect_threshold_dbm, -98.8);
  EXPECT_EQ(c.sim.path_loss.alpha(), 20.06);
  EXPECT_EQ(c.sim.path_loss.beta(), 4.0);
  EXPECT_EQ(c.sim.payload_bytes, 350u);
  EXPECT_EQ(c.sim.shadowing.std_dev_db, 3.0);
  EXPECT_EQ(c.sim.shadowing.decorrelation_distance_m, 25.0);
  EXPECT_EQ(c.sim.scenario.road_length_m, 2000.0);
  EXPECT_EQ(c.sim.scenario.speed_mean_kmh, 70.0);
  EXPECT_EQ(c.sim.scenario.speed_std_kmh, 7.0);
  EXPECT_EQ(c.sim.grid.subchannels, 5);
  EXPECT_EQ(c.sim.sps.rsrp_threshold_dbm, -110.0);
  EXPECT_EQ(c.sim.per_11p.sinr_50_db, 1.02);
  EXPECT_EQ(c.sim.per_lte.sinr_50_db, 5.15);
  EXPECT_EQ(c.sim.duration_s, 30.0);
  EXPECT_EQ(c.seeds.size(), 3u);
}

TEST(Json, RoundTrip) {
  auto c = preset("fig7");
  c.seeds = {4, 5};
  c.sim.duration_s = 12.5;
  c.sim.radio.noise_figure_db = 7.0;
  c.densities = {80.0};
  c.cases.push_back({"only-lte-legacy", sim::CoexMode::only_lte, false});
  const auto j = to_json(c);
  const auto back = run_config_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.cases.back().preamble, std::optional<bool>(false));
}

TEST(Experiment, AnalyticCsvIndependentOfWorkers) {
  auto c = tiny_analytic();
  c.workers = 1;
  const auto a = csv_payloads(run_experiment(c));
  c.workers = 3;
  const auto b = csv_payloads(run_experiment(c));
  EXPECT_EQ(a, b);
  const auto& csv = a.at("analytic.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')).rfind("sweep_var,prp_closed,prp_exact,prp_mc,mc_halfwidth,p_busy", 0), 0u);
}

TEST(Experiment, SimulationCsvIndependentOfWorkers) {
  auto c = tiny_sim();
  c.workers = 1;
  const auto a = csv_payloads(run_experiment(c));
  const auto again = csv_payloads(run_experiment(c));
  c.workers = 2;
  const auto b = csv_payloads(run_experiment(c));
  EXPECT_EQ(a, again);
  EXPECT_EQ(a, b);
  for (const char* f : {"prr.csv", "da.csv", "cbr.csv", "aggregates.csv", "summary.csv"})
    EXPECT_TRUE(a.count(f)) << f;
}

TEST(Experiment, MetadataRerunIsIdentical) {
  const auto dir = std::filesystem::temp_directory_path() / "coexsim_cli_test";
  std::filesystem::remove_all(dir);
  auto c = tiny_sim();
  const auto first = run_experiment(c);
  write_bundle(first, dir / "nested");
  std::ifstream f(dir / "nested" / "metadata.json");
  ASSERT_TRUE(f);
  const auto meta = nlohmann::json::parse(f);
  EXPECT_EQ(meta.at("config").at("sim").at("scenario").at("road_length_m"), 2000.0);
  const auto again = run_experiment(run_config_from_json(meta.at("config")));
  EXPECT_EQ(csv_payloads(first), csv_payloads(again));
  for (const char* file : {"prr.csv", "aggregates.csv", "metadata.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / "nested" / file)) << file;
  std::filesystem::remove_all(dir);
}

TEST(Experiment, RowsCarrySeedAndPreset) {
  const auto csv = csv_payloads(run_experiment(tiny_sim()));
  const auto& prr = csv.at("prr.csv");
  const auto header = prr.substr(0, prr.find('\n'));
  EXPECT_NE(header.find("seed"), std::string::npos);
  EXPECT_NE(header.find("preset"), std::string::npos);
  const auto line = prr.substr(header.size() + 1, prr.find('\n', header.size() + 1) - header.size() - 1);
  EXPECT_NE(line.find(",fig6"), std::string::npos);
}
