#pragma once

#include <cstdint>

#include "coexsim/propagation.hpp"

namespace coexsim::analytic {

// Single-link free-flow setup: an 802.11p transmitter at distance d_u from its
// receiver, LTE-V2X interferers forming a 1-D Poisson process per TTI.
struct FreeFlowParams {
  double lambda = 1.0;             // LTE transmissions per metre per second
  double link_distance_m = 200.0;  // d_u
  double t_pck_s = 622e-6;         // 802.11p frame (350 B) plus AIFS
  double t_tti_s = 1e-3;
  double sense_threshold_dbm = -65.0;
  double sinr_threshold_db = 1.02;
  // LTE interferer power is the configured density over this bandwidth. The
  // 10 MHz default puts both technologies at the same total power.
  double lte_bandwidth_mhz = 10.0;
  propagation::RadioConfig radio;
  propagation::PathLossModel path_loss;

  void validate() const;

  double dot11p_rx_power_dbm() const;            // useful power at d_u
  double lte_rx_power_dbm(double distance_m) const;
  double noise_dbm() const;
};

struct DerivedQuantities {
  double lambda_tti = 0.0;  // per metre
  double n_tti = 0.0;       // TTIs per second
  double protected_range_m = 0.0;
  double min_interferer_distance_m = 0.0;  // +inf when the link is noise limited
  double p_c = 0.0;
};

struct PrpBreakdown {
  double p_busy = 0.0;
  double p_pr_given_busy = 0.0;
  double p_c_idle = 0.0;
  double p_sq_idle = 0.0;
  double p_pr_unprotected = 0.0;
  double p_pr = 0.0;
};

double protected_range(const FreeFlowParams& p);
double min_interferer_distance(const FreeFlowParams& p);
DerivedQuantities derive(const FreeFlowParams& p);

double p_busy(const FreeFlowParams& p);
double p_pr_given_busy(const FreeFlowParams& p);
double p_pr_unprotected(const FreeFlowParams& p);
PrpBreakdown prp_closed_form(const FreeFlowParams& p);

// Composite Gauss-Legendre on every smooth piece. The coarse pass uses 15
// nodes per panel, the fine pass 30 nodes on twice as many panels.
struct QuadratureSpec {
  unsigned panels = 4;
  double tail_mass = 1e-9;  // truncation of the nearest-point density
  double max_refinement_delta = 1e-3;
};

struct ExactResult {
  double p_pr = 0.0;
  double p_busy = 0.0;
  double p_pr_given_busy = 0.0;
  double p_pr_given_sq = 0.0;
  double refinement_delta = 0.0;  // |fine - coarse|
  double truncation_radius_m = 0.0;
  bool converged = true;
};

// Direct evaluation of the straddling-packet probability by nested composite
// quadrature over (tau, y, x), assembled with quadrature-evaluated busy terms.
ExactResult prp_exact_numeric(const FreeFlowParams& p, const QuadratureSpec& spec = {});

struct McResult {
  double p_pr = 0.0;
  double half_width = 0.0;  // 95% normal-approximation half width
  std::uint64_t trials = 0;
};

// Trials are split into fixed chunks with their own seeded streams, so the
// result depends on (seed, trials) only and not on the worker count.
McResult prp_monte_carlo(const FreeFlowParams& p, std::uint64_t trials, std::uint64_t seed,
                         unsigned workers = 1);

}  // namespace coexsim::analytic
