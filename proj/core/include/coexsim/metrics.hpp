#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coexsim/scenario.hpp"

namespace coexsim::sim {

// Packet reception ratio per distance bin.
class PrrBins {
 public:
  PrrBins(double bin_m = 10.0, double max_range_m = 700.0);

  void add(double distance_m, bool decoded);
  void merge(const PrrBins& other);

  std::size_t size() const { return decoded_.size(); }
  double bin_m() const { return bin_m_; }
  double low(std::size_t i) const { return bin_m_ * static_cast<double>(i); }
  double high(std::size_t i) const { return bin_m_ * static_cast<double>(i + 1); }
  std::uint64_t decoded(std::size_t i) const { return decoded_[i]; }
  std::uint64_t samples(std::size_t i) const { return total_[i]; }
  // NaN for an empty bin.
  double prr(std::size_t i) const;

 private:
  double bin_m_;
  std::vector<std::uint64_t> decoded_;
  std::vector<std::uint64_t> total_;
};

// Data-age samples on a fixed grid (1 ms by default).
class DaHistogram {
 public:
  explicit DaHistogram(double bin_s = 1e-3, double max_s = 30.0);

  void add(double da_s);
  void merge(const DaHistogram& other);

  double bin_s() const { return bin_s_; }
  std::uint64_t samples() const { return n_; }
  std::size_t size() const { return counts_.size(); }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }
  double value(std::size_t i) const { return bin_s_ * static_cast<double>(i); }

 private:
  double bin_s_;
  std::vector<std::uint64_t> counts_;  // last bin collects everything beyond max_s
  std::uint64_t n_ = 0;
};

struct CcdfPoint {
  double da_s = 0.0;
  double ccdf = 0.0;  // P(DA > da_s)
};

struct DaCcdf {
  std::vector<CcdfPoint> points;  // only values that occur
  double quantile_s = 0.0;        // smallest DA with ccdf <= probability
  double probability = 1e-3;
  std::uint64_t samples = 0;
  bool reliable = false;          // enough samples to resolve `probability`
};

DaCcdf da_ccdf(const DaHistogram& h, double probability = 1e-3);
DaCcdf da_ccdf(std::span<const double> records, double probability = 1e-3);

struct CbrSample {
  double t_s = 0.0;
  double cbr = 0.0;  // mean over stations of this technology
};

struct TechMetrics {
  Tech tech = Tech::dot11p;
  std::size_t vehicles = 0;
  PrrBins prr;
  DaHistogram da;
  std::uint64_t generated = 0;
  std::uint64_t packets_sent = 0;
  std::uint64_t transmissions = 0;
  double cbr_sum = 0.0;
  std::uint64_t cbr_windows = 0;
  std::vector<CbrSample> cbr_series;
  double measured_s = 0.0;

  double msgs_per_s() const;
  double ntx() const;
  double mean_cbr() const;
};

struct MetricsReport {
  std::vector<TechMetrics> techs;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;

  const TechMetrics* find(Tech t) const;
};

}  // namespace coexsim::sim
