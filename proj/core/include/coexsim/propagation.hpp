#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coexsim/units.hpp"

namespace coexsim::propagation {

// Radio parameters shared by both technologies. Powers in dBm, gains in dB.
struct RadioConfig {
  double tx_power_density_dbm_per_mhz = 13.0;
  double bandwidth_mhz = 10.0;
  double antenna_gain_tx_db = 3.0;
  double antenna_gain_rx_db = 3.0;
  double noise_figure_db = 6.0;
  double cca_energy_threshold_dbm = -65.0;
  double preamble_detect_threshold_dbm = -98.8;
  double cbr_busy_threshold_11p_dbm = -85.0;
  double cbr_busy_threshold_lte_dbm = -94.0;
  double sps_sensing_threshold_dbm = -110.0;

  double total_tx_power_dbm() const { return power_over_dbm(bandwidth_mhz); }
  double power_over_dbm(double mhz) const {
    return tx_power_density_dbm_per_mhz + 10.0 * std::log10(mhz);
  }
  double antenna_gains_db() const { return antenna_gain_tx_db + antenna_gain_rx_db; }

  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

// L(d) = alpha + 10 * beta * log10(d), d clamped to the 1 m validity floor.
class PathLossModel {
 public:
  static constexpr double kMinDistance = 1.0;

  PathLossModel() = default;
  PathLossModel(double alpha_db, double beta);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  double loss_db(double distance_m) const;
  // Distance at which the loss equals `loss`. Throws std::domain_error for
  // loss < alpha (below the 1 m anchor).
  double inverse(double loss_db) const;

 private:
  double alpha_ = 20.06;
  double beta_ = 4.0;
};

inline double path_loss_db(const PathLossModel& model, double distance_m) {
  return model.loss_db(distance_m);
}
inline double inverse_path_loss(const PathLossModel& model, double loss_db) {
  return model.inverse(loss_db);
}

// Thermal noise (-174 dBm/Hz) over `bandwidth_mhz` plus the receiver noise figure.
double noise_power_dbm(double bandwidth_mhz, double noise_figure_db);

// Default logistic slope: PER 0.5 -> 0.9 over 1.82 dB (1.02 dB -> -0.8 dB).
inline const double kDefaultPerSlope = std::log(9.0) / 1.82;

// Link abstraction: PER(sinr) = 1 / (1 + exp(slope * (sinr - sinr_50))).
struct PerCurve {
  double sinr_50_db = 1.02;
  double slope_per_db = kDefaultPerSlope;
  std::string label;

  double per(double sinr_db) const;
  double success(double sinr_db) const { return 1.0 - per(sinr_db); }

  static PerCurve dot11p_mcs2();
  static PerCurve lte_mcs11();
};

inline double per(const PerCurve& curve, double sinr_db) { return curve.per(sinr_db); }

struct WeightedInterferer {
  double power_mw = 0.0;
  double overlap_fraction = 1.0;
};

// 10 log10(useful / (noise + sum fraction_i * power_i)); -inf when useful is 0.
double mean_sinr_db(double useful_mw, std::span<const WeightedInterferer> interferers,
                    double noise_mw);

struct ShadowingParams {
  double std_dev_db = 3.0;
  double decorrelation_distance_m = 25.0;
};

// Directed link between two stations.
struct LinkId {
  std::uint32_t tx = 0;
  std::uint32_t rx = 0;
};

// Log-normal shadowing with exponential spatial autocorrelation, kept per
// directed link. Links sample N(0, sigma) on first use; afterwards
//   s' = rho s + sqrt(1 - rho^2) N(0, sigma),  rho = exp(-moved / d_corr).
class ShadowingField {
 public:
  ShadowingField(ShadowingParams params, std::uint32_t stations);

  const ShadowingParams& params() const { return params_; }
  std::uint32_t stations() const { return stations_; }

  // Advances the link after it moved by `moved_m` and returns the new value (dB).
  double sample(LinkId link, double moved_m, std::mt19937_64& rng);

  // Like sample(), with the motion expressed as a monotone per-link odometer
  // reading; the field remembers where the link was last sampled.
  double sample_at(LinkId link, double odometer_m, std::mt19937_64& rng);

  // Last sampled value (0 for a link never sampled).
  double current(LinkId link) const;

 private:
  struct LinkState {
    double value = 0.0;
    bool initialized = false;
    double odometer = 0.0;
  };

  LinkState& slot(LinkId link);
  double update(LinkState& s, double moved_m, double unit_normal) const;

  ShadowingParams params_;
  std::uint32_t stations_;
  std::vector<LinkState> links_;
};

}  // namespace coexsim::propagation
