#include "coexsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coexsim::sim {

PrrBins::PrrBins(double bin_m, double max_range_m) : bin_m_(bin_m) {
  if (!(bin_m > 0.0) || !(max_range_m > 0.0)) throw std::invalid_argument("bad PRR binning");
  const auto n = static_cast<std::size_t>(std::ceil(max_range_m / bin_m - 1e-9));
  decoded_.assign(n, 0);
  total_.assign(n, 0);
}

void PrrBins::add(double distance_m, bool decoded) {
  if (distance_m < 0.0) return;
  const auto i = static_cast<std::size_t>(distance_m / bin_m_);
  if (i >= total_.size()) return;
  ++total_[i];
  if (decoded) ++decoded_[i];
}

void PrrBins::merge(const PrrBins& other) {
  if (other.size() != size() || other.bin_m_ != bin_m_) throw std::invalid_argument("PRR bins differ");
  for (std::size_t i = 0; i < size(); ++i) {
    decoded_[i] += other.decoded_[i];
    total_[i] += other.total_[i];
  }
}

double PrrBins::prr(std::size_t i) const {
  if (total_[i] == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(decoded_[i]) / static_cast<double>(total_[i]);
}

DaHistogram::DaHistogram(double bin_s, double max_s) : bin_s_(bin_s) {
  if (!(bin_s > 0.0) || !(max_s > bin_s)) throw std::invalid_argument("bad DA binning");
  counts_.assign(static_cast<std::size_t>(std::llround(max_s / bin_s)) + 1, 0);
}

void DaHistogram::add(double da_s) {
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::llround(std::max(da_s, 0.0) / bin_s_)),
                                       counts_.size() - 1);
  ++counts_[i];
  ++n_;
}

void DaHistogram::merge(const DaHistogram& other) {
  if (other.counts_.size() != counts_.size() || other.bin_s_ != bin_s_)
    throw std::invalid_argument("DA histograms differ");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  n_ += other.n_;
}

DaCcdf da_ccdf(const DaHistogram& h, double probability) {
  DaCcdf out;
  out.probability = probability;
  out.samples = h.samples();
  out.reliable = h.samples() >= static_cast<std::uint64_t>(std::ceil(1.0 / probability));
  if (h.samples() == 0) return out;
  const double n = static_cast<double>(h.samples());
  std::uint64_t at_or_below = 0;
  bool found = false;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h.count(i) == 0) continue;
    at_or_below += h.count(i);
    const double ccdf = static_cast<double>(h.samples() - at_or_below) / n;
    out.points.push_back({h.value(i), ccdf});
    if (!found && ccdf <= probability) {
      out.quantile_s = h.value(i);
      found = true;
    }
  }
  return out;
}

DaCcdf da_ccdf(std::span<const double> records, double probability) {
  double hi = 1.0;
  for (double r : records) hi = std::max(hi, r);
  DaHistogram h(1e-3, std::ceil(hi) + 1.0);
  for (double r : records) h.add(r);
  return da_ccdf(h, probability);
}

double TechMetrics::msgs_per_s() const {
  if (vehicles == 0 || measured_s <= 0.0) return 0.0;
  return static_cast<double>(generated) / (static_cast<double>(vehicles) * measured_s);
}

double TechMetrics::ntx() const {
  return packets_sent ? static_cast<double>(transmissions) / static_cast<double>(packets_sent) : 0.0;
}

double TechMetrics::mean_cbr() const {
  return cbr_windows ? cbr_sum / static_cast<double>(cbr_windows) : 0.0;
}

const TechMetrics* MetricsReport::find(Tech t) const {
  for (const auto& m : techs)
    if (m.tech == t) return &m;
  return nullptr;
}

}  // namespace coexsim::sim
