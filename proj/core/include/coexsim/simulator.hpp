#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>

#include "coexsim/dot11p.hpp"
#include "coexsim/ltev2x.hpp"
#include "coexsim/metrics.hpp"
#include "coexsim/propagation.hpp"
#include "coexsim/scenario.hpp"

namespace coexsim::sim {

struct SimConfig {
  ScenarioConfig scenario;
  CoexMode mode = CoexMode::legacy;
  std::optional<bool> preamble_insertion;  // overrides the mode default
  double duration_s = 30.0;                // measured time after the warm-up
  double warmup_s = 2.0;
  std::size_t payload_bytes = 350;

  propagation::RadioConfig radio;
  propagation::PathLossModel path_loss;
  propagation::ShadowingParams shadowing;
  propagation::PerCurve per_11p = propagation::PerCurve::dot11p_mcs2();
  propagation::PerCurve per_lte = propagation::PerCurve::lte_mcs11();

  dot11p::Dot11pConfig dot11p;
  double dcc_t_g_s = 0.1;

  lte::ResourceGrid grid;
  lte::SpsConfig sps;
  double lte_cbr_threshold_dbm = -94.0;

  CamConfig cam;

  double prr_bin_m = 10.0;
  double prr_max_range_m = 700.0;
  double da_range_m = 400.0;

  ModeTraits effective_traits() const;
  void validate() const;
};

enum class ReceptionOutcome { decoded, failed, half_duplex };

// One reception draw: mean SINR over the packet with overlap-weighted
// interference, success with probability 1 - PER(SINR).
ReceptionOutcome reception_decision(double useful_mw,
                                    std::span<const propagation::WeightedInterferer> interferers,
                                    double noise_mw, const propagation::PerCurve& curve,
                                    bool rx_transmitting, std::mt19937_64& rng);

// Bit-identical for identical (config, seed).
MetricsReport run(const SimConfig& config, std::uint64_t seed);

}  // namespace coexsim::sim
