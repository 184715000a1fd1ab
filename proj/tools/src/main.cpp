#include <fmt/format.h>

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "run_config.hpp"

using namespace coexsim;

int main(int argc, char** argv) {
  CLI::App app{"Co-channel coexistence of IEEE 802.11p and LTE-V2X: analysis and simulation"};
  app.set_version_flag("--version", std::string(cli::kToolVersion));

  std::string preset_name = "custom";
  std::vector<std::uint64_t> seeds;
  std::optional<double> duration, warmup;
  std::vector<double> densities;
  std::vector<std::string> modes;
  std::optional<std::string> out_dir, config_file;
  std::optional<std::uint64_t> mc_trials;
  unsigned workers = 1;
  bool check = false, no_plots = false, list = false;

  std::string preset_help = "Experiment preset:";
  for (const auto& n : cli::preset_names()) preset_help += " " + n;
  app.add_option("preset", preset_name, preset_help);
  app.add_option("--seed", seeds, "Seed(s), one run per seed")->expected(1, -1);
  app.add_option("--duration", duration, "Measured simulated seconds per run");
  app.add_option("--warmup", warmup, "Warm-up seconds excluded from metrics");
  app.add_option("--density", densities, "Vehicles per km per technology")->expected(1, -1);
  app.add_option("--mode", modes, "Coexistence mode(s)")->expected(1, -1);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--config", config_file, "Re-run from a metadata.json or config JSON file");
  app.add_option("--workers", workers, "Parallel runs")->check(CLI::PositiveNumber);
  app.add_option("--mc-trials", mc_trials, "Monte Carlo trials per analytic point");
  app.add_flag("--check", check, "Exit non-zero when a preset check fails");
  app.add_flag("--no-plots", no_plots, "Skip SVG rendering");
  app.add_flag("--list", list, "List presets and modes");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    std::cout << "presets:";
    for (const auto& n : cli::preset_names()) std::cout << " " << n;
    std::cout << "\nmodes:";
    for (auto m : sim::all_modes()) std::cout << " " << sim::to_string(m);
    std::cout << "\n";
    return 0;
  }

  try {
    cli::RunConfig cfg;
    if (config_file) {
      std::ifstream f(*config_file);
      if (!f) throw std::runtime_error("cannot open " + *config_file);
      const auto j = nlohmann::json::parse(f);
      cfg = cli::run_config_from_json(j.contains("config") ? j.at("config") : j);
    } else {
      cfg = cli::preset(preset_name);
      cfg.out_dir = "out/" + preset_name;
    }
    if (!seeds.empty()) cfg.seeds = seeds;
    if (duration) cfg.sim.duration_s = *duration;
    if (warmup) cfg.sim.warmup_s = *warmup;
    if (!densities.empty()) cfg.densities = densities;
    if (!modes.empty()) {
      cfg.cases.clear();
      for (const auto& m : modes) {
        const auto mode = sim::parse_mode(m);
        if (!mode) throw std::invalid_argument("unknown mode '" + m + "' (see --list)");
        cfg.cases.push_back(cli::make_case(*mode));
      }
    }
    if (out_dir) cfg.out_dir = *out_dir;
    if (mc_trials) cfg.mc_trials = *mc_trials;
    cfg.workers = workers;
    cfg.check = cfg.check || check;
    if (no_plots) cfg.render = false;

    const auto bundle = cli::run_experiment(cfg, &std::cerr);
    cli::write_bundle(bundle, cfg.out_dir, &std::cerr);

    bool failed = false;
    for (const auto& c : bundle.checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
      failed |= !c.pass;
    }
    std::cout << "wrote " << cfg.out_dir.string() << "\n";
    return cfg.check && failed ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
