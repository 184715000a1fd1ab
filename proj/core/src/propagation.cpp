#include "coexsim/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coexsim::propagation {

void RadioConfig::validate() const {
  if (!(bandwidth_mhz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (!(preamble_detect_threshold_dbm < cca_energy_threshold_dbm))
    throw std::invalid_argument("preamble detection threshold must be below the CCA threshold");
}

PathLossModel::PathLossModel(double alpha_db, double beta) : alpha_(alpha_db), beta_(beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("path loss exponent factor must be positive");
}

double PathLossModel::loss_db(double distance_m) const {
  const double d = std::max(distance_m, kMinDistance);
  return alpha_ + 10.0 * beta_ * std::log10(d);
}

double PathLossModel::inverse(double loss_db) const {
  if (loss_db < alpha_) throw std::domain_error("loss below the 1 m anchor of the model");
  return std::pow(10.0, (loss_db - alpha_) / (10.0 * beta_));
}

double noise_power_dbm(double bandwidth_mhz, double noise_figure_db) {
  if (!(bandwidth_mhz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  return -174.0 + 10.0 * std::log10(bandwidth_mhz * 1e6) + noise_figure_db;
}

double PerCurve::per(double sinr_db) const {
  if (std::isnan(sinr_db)) return 1.0;
  const double z = slope_per_db * (sinr_db - sinr_50_db);
  // exp overflows past ~709; the logistic is already 0 or 1 to double precision there.
  if (z > 700.0) return 0.0;
  if (z < -700.0) return 1.0;
  return 1.0 / (1.0 + std::exp(z));
}

PerCurve PerCurve::dot11p_mcs2() { return {1.02, kDefaultPerSlope, "802.11p MCS2"}; }
PerCurve PerCurve::lte_mcs11() { return {5.15, kDefaultPerSlope, "LTE-V2X MCS11"}; }

double mean_sinr_db(double useful_mw, std::span<const WeightedInterferer> interferers,
                    double noise_mw) {
  if (useful_mw <= 0.0) return -kInf;
  double denom = noise_mw;
  for (const auto& i : interferers) denom += i.overlap_fraction * i.power_mw;
  if (denom <= 0.0) return kInf;
  return 10.0 * std::log10(useful_mw / denom);
}

}  // namespace coexsim::propagation
