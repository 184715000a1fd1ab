#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coexsim/analytic_model.hpp"
#include "coexsim/simulator.hpp"
#include "json.hpp"

namespace coexsim::cli {

inline constexpr const char* kToolVersion = "0.3.0";

enum class ExperimentKind { analytic_distance, analytic_lambda, simulation };

// One simulated curve: a coexistence mode, optionally with the preamble
// default of the mode overridden. `label` is what the CSVs call the mode.
struct SimCase {
  std::string label;
  sim::CoexMode mode = sim::CoexMode::legacy;
  std::optional<bool> preamble;
};

struct RunConfig {
  std::string preset = "custom";
  ExperimentKind kind = ExperimentKind::simulation;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::filesystem::path out_dir = "out";
  unsigned workers = 1;
  bool check = false;
  bool render = true;

  // simulation
  sim::SimConfig sim;
  std::vector<SimCase> cases{{"legacy", sim::CoexMode::legacy, std::nullopt}};
  std::vector<double> densities{50.0};  // vehicles/km for each technology present

  // analytic
  analytic::FreeFlowParams free_flow;
  std::vector<double> sweep;  // d_u (m) or lambda (1/m/s)
  std::vector<double> thresholds_dbm{-65.0, -98.8};
  std::uint64_t mc_trials = 1'000'000;
  analytic::QuadratureSpec quadrature;

  void validate() const;
};

std::vector<std::string> preset_names();
// Throws std::invalid_argument listing the known presets.
RunConfig preset(const std::string& name);

SimCase make_case(sim::CoexMode mode);
std::string to_string(ExperimentKind k);

nlohmann::json to_json(const RunConfig& cfg);
// Starts from the defaults of the preset named in the document and overrides
// every field present.
RunConfig run_config_from_json(const nlohmann::json& j);

}  // namespace coexsim::cli
