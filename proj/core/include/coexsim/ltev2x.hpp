#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "coexsim/spectrum.hpp"
#include "coexsim/units.hpp"

namespace coexsim::lte {

enum class PoolKind { full, half };
enum class CcVariant { standard, modified };

struct LteTxOptions {
  bool harq = true;
  bool preamble_insertion = false;
  PoolKind pool = PoolKind::full;
  CcVariant cc_variant = CcVariant::standard;
};

// Time-frequency lattice of the sidelink pool inside the 10 MHz channel.
struct ResourceGrid {
  SimTime tti = millis(1);
  int subchannels = 5;
  int subchannel_prbs = 10;
  int subchannels_per_packet = 2;
  double prb_mhz = 0.18;
  double lower_guard_mhz = 0.5;
  PoolKind pool = PoolKind::full;
  int half_pool_period = 50;
  int half_pool_active = 25;

  double subchannel_mhz() const { return subchannel_prbs * prb_mhz; }
  Band subchannel_band(int k) const;
  Band band(int first, int count) const;
  Band pool_band() const { return band(0, subchannels); }
  bool in_pool(std::int64_t tti_index) const;
  double duty_cycle() const;
  int start_positions() const { return subchannels - subchannels_per_packet + 1; }

  // 14 SC-FDMA symbols per TTI; the last one is left empty.
  SimTime symbol() const { return tti / 14; }
  SimTime signal_duration() const { return tti * 13 / 14; }
};

struct Resource {
  std::int64_t tti = 0;
  int subchannel = 0;  // first of the contiguous subchannels

  friend bool operator==(const Resource&, const Resource&) = default;
};

// Power profile of one LTE-V2X transmission, relative to the TTI start. With
// preamble insertion the first 40 us spread over the whole pool band.
std::vector<SignalSegment> emitted_signal(const LteTxOptions& options, const ResourceGrid& grid,
                                          int first_subchannel, double density_mw_per_mhz,
                                          SimTime preamble_duration = micros(40));

// Reservation announced in a decoded SCI.
struct Reservation {
  std::int64_t tti = 0;  // TTI in which the SCI was heard
  int subchannel = 0;
  int count = 2;
  int rri_ms = 100;
  double rsrp_dbm = -kInf;  // per resource element
  std::uint32_t station = 0;
};

// Per-station sensing memory over the last second: time-weighted RSSI per
// (TTI, subchannel) and SCI reservations. NaN marks TTIs that could not be
// sensed (own transmission).
class SensingDb {
 public:
  explicit SensingDb(int subchannels = 5, int history_ttis = 1000);

  int subchannels() const { return subchannels_; }
  int history() const { return history_; }

  // Opens TTI `tti` for accumulation, discarding what the slot held before.
  void open(std::int64_t tti);
  void add_rssi(std::int64_t tti, int subchannel, double mw);
  void mark_unsensed(std::int64_t tti);
  // NaN if unsensed or outside the history.
  double rssi(std::int64_t tti, int subchannel) const;
  bool sensed(std::int64_t tti) const;

  void add_reservation(const Reservation& r);
  void prune(std::int64_t now_tti);
  const std::deque<Reservation>& reservations() const { return reservations_; }

 private:
  std::size_t slot(std::int64_t tti) const;

  int subchannels_;
  int history_;
  std::vector<double> rssi_mw_;
  std::vector<std::int64_t> tag_;  // TTI a slot currently represents
  std::deque<Reservation> reservations_;
};

struct SpsConfig {
  int rri_ms = 100;
  int counter_min = 5;
  int counter_max = 15;
  double keep_probability = 0.5;
  double best_fraction = 0.2;
  double min_candidate_fraction = 0.2;
  double rsrp_threshold_dbm = -110.0;
  double relax_step_db = 3.0;
  int harq_window_ttis = 15;
  int rssi_periods = 10;
};

struct SelectionStats {
  std::size_t total = 0;
  std::size_t after_exclusion = 0;
  double threshold_dbm = 0.0;
};

// Sensing-based selection over TTIs now+1 .. now+min(rri, 100) admitted by the pool.
Resource sps_select(const SensingDb& db, const ResourceGrid& grid, const SpsConfig& cfg,
                    std::int64_t now_tti, std::mt19937_64& rng, SelectionStats* stats = nullptr);

// Retransmission resource 1..harq_window TTIs after the primary, same rules.
std::optional<Resource> harq_resource(const Resource& primary, const SensingDb& db,
                                      const ResourceGrid& grid, const SpsConfig& cfg,
                                      std::mt19937_64& rng);

int draw_counter(const SpsConfig& cfg, std::mt19937_64& rng);

struct SpsProcess {
  Resource next;                  // next primary opportunity
  std::optional<int> harq_offset; // TTIs from primary to secondary
  int harq_subchannel = 0;
  int counter = 0;
  int rri_ms = 100;
  bool active = false;

  std::optional<Resource> secondary() const;
};

enum class KeepDecision { keep, reselect };

// Called once the counter reached zero. On keep the counter is redrawn and the
// resource is left untouched; on reselect nothing is modified.
KeepDecision keep_or_reselect(SpsProcess& process, const SpsConfig& cfg, std::mt19937_64& rng);

// Fraction of subchannel-TTIs whose S-RSSI exceeded the threshold.
double cbr_lte(std::span<const double> subchannel_rssi_dbm, double threshold_dbm = -94.0);

// Maximum channel occupancy ratio; 1.0 means no limit.
double cr_limit(double cbr, CcVariant variant);

struct LteCcState {
  double cbr_estimate = 0.0;
  double cr_current = 0.0;
  double cr_limit = 1.0;
  CcVariant variant = CcVariant::standard;
};

struct CcDecision {
  int ntx = 2;
  double min_interval_s = 0.1;
  bool generation_allowed = true;
};

// Enforces the CR limit for a packet of `subchannels_per_tx` per copy:
// first drop the blind retransmission, then stretch the generation interval
// and hold generation until the past-second occupancy is back under budget.
CcDecision apply_cc(const LteCcState& state, double used_subchannel_ttis, double t_g_s,
                    int subchannels_per_tx = 2, double budget_scale = 5000.0);

// Rolling one-second log of own subchannel-TTI usage.
class OccupancyLog {
 public:
  void record(SimTime t, int subchannel_ttis);
  double used(SimTime now, SimTime window = millis(1000));
  double ratio(SimTime now, double total_per_window = 5000.0, SimTime window = millis(1000));
  // Earliest time the usage drops to `target` or below (now if it already has).
  SimTime time_until_below(SimTime now, double target, SimTime window = millis(1000));

 private:
  void expire(SimTime now, SimTime window);
  std::deque<std::pair<SimTime, int>> entries_;
  double total_ = 0.0;
};

}  // namespace coexsim::lte
