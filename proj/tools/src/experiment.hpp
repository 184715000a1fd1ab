#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "coexsim/analytic_model.hpp"
#include "coexsim/metrics.hpp"
#include "run_config.hpp"

namespace coexsim::cli {

struct AnalyticRow {
  double sweep = 0.0;
  double threshold_dbm = 0.0;
  std::uint64_t mc_seed = 0;
  analytic::PrpBreakdown closed;
  analytic::ExactResult exact;
  analytic::McResult mc;
};

struct SimRun {
  std::size_t case_index = 0;
  double density = 0.0;
  std::uint64_t seed = 0;
  sim::MetricsReport report;
  double wall_s = 0.0;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ReportBundle {
  RunConfig config;
  std::vector<AnalyticRow> analytic;  // ordered by (threshold, sweep)
  std::vector<SimRun> runs;           // ordered by (case, density, seed)
  std::vector<CheckResult> checks;
};

// Seed-pooled view of one (case, density, technology) point.
struct Pooled {
  sim::PrrBins prr;
  sim::DaHistogram da;
  double msgs_per_s = 0.0;
  double cbr = 0.0;
  double ntx = 0.0;
  std::size_t seeds = 0;

  double mean_prr(double up_to_m) const;
};

// Runs every job of the configuration on `config.workers` threads. Results do
// not depend on the worker count.
ReportBundle run_experiment(const RunConfig& config, std::ostream* log = nullptr);

std::optional<Pooled> pooled(const ReportBundle& b, std::size_t case_index, double density, sim::Tech tech);
std::optional<std::size_t> find_case(const RunConfig& c, const std::string& label);

// Preset-specific checks for whatever points the bundle holds.
std::vector<CheckResult> evaluate_checks(const ReportBundle& b);

// CSV file name -> payload. Identical for identical (config, seeds).
std::map<std::string, std::string> csv_payloads(const ReportBundle& b);

// Writes CSVs, metadata.json and (if enabled) SVG plots into `dir`, creating it.
void write_bundle(const ReportBundle& b, const std::filesystem::path& dir, std::ostream* log = nullptr);

}  // namespace coexsim::cli
