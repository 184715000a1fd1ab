#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>

#include "coexsim/units.hpp"

namespace coexsim::dot11p {

struct Dot11pConfig {
  SimTime aifs = micros(110);
  SimTime slot = micros(13);
  unsigned cw_max_slots = 15;
  double cca_energy_threshold_dbm = -65.0;
  double preamble_detect_threshold_dbm = -98.8;
  double preamble_sinr_threshold_db = -0.8;
  double cbr_busy_threshold_dbm = -85.0;
  SimTime cbr_window = millis(100);
  double data_rate_mbps = 6.0;
  SimTime preamble_duration = micros(40);
  SimTime symbol = micros(8);

  void validate() const;
};

// PHY frame airtime: preamble + OFDM symbols carrying service (16), tail (6)
// and payload bits at the configured data rate.
SimTime frame_duration(std::size_t payload_bytes, const Dot11pConfig& cfg = {});

// A preamble is decoded when it is both strong enough and clean enough.
bool preamble_decodable(double power_dbm, double sinr_db, const Dot11pConfig& cfg = {});

// Clear channel assessment: energy above the CCA threshold, or a virtual
// carrier-sense (NAV) period declared by an earlier decoded preamble.
bool cca_busy(double in_band_power_dbm, SimTime now, SimTime nav_until,
              const Dot11pConfig& cfg = {});

enum class Phase { idle, deferring, backoff, transmitting };
enum class Action { wait, start_tx, decrement_backoff };

struct QueuedPacket {
  std::uint64_t id = 0;
  SimTime generated{0};
  std::size_t bytes = 0;
};

// CSMA/CA for one broadcast station. step() must be called whenever the
// sensed channel state may have changed and when deadline() is reached.
class CsmaMac {
 public:
  explicit CsmaMac(Dot11pConfig cfg = {}) : cfg_(cfg) {}

  // Queues a packet. A packet still waiting for access is replaced (the access
  // state is kept); returns true if one was dropped that way.
  bool enqueue(const QueuedPacket& pkt, SimTime now, bool busy, std::mt19937_64& rng);

  Action step(SimTime now, bool busy, std::mt19937_64& rng);

  // Leaves the transmitting phase; a packet queued meanwhile starts a new access
  // with a backoff (the medium was busy with our own frame).
  void on_tx_end(SimTime now, bool busy, std::mt19937_64& rng);

  // Instant at which step() would return start_tx if the channel stays idle.
  SimTime deadline() const;

  Phase phase() const { return phase_; }
  int backoff_remaining() const { return backoff_; }
  bool has_packet() const { return queued_.has_value(); }
  const std::optional<QueuedPacket>& queued() const { return queued_; }
  const std::optional<QueuedPacket>& in_flight() const { return in_flight_; }
  const Dot11pConfig& config() const { return cfg_; }

 private:
  void draw_backoff(std::mt19937_64& rng);
  void begin_access(SimTime now, bool busy, bool force_backoff, std::mt19937_64& rng);

  Dot11pConfig cfg_;
  Phase phase_ = Phase::idle;
  int backoff_ = -1;  // -1: no backoff drawn for this access
  bool channel_busy_ = false;
  SimTime anchor_{0};  // start of the current idle sensing period
  std::optional<QueuedPacket> queued_;
  std::optional<QueuedPacket> in_flight_;
};

// Piecewise-constant received power, each sample holding until the next one.
struct PowerSample {
  SimTime t{0};
  double power_dbm = -kInf;
};

// Fraction of [window_begin, window_end) spent at or above the busy threshold.
double cbr_11p(std::span<const PowerSample> trace, SimTime window_begin, SimTime window_end,
               double busy_threshold_dbm = -85.0);

// Incremental counterpart of cbr_11p fed with busy/idle transitions.
class BusyRatioMeter {
 public:
  void reset(SimTime window_begin);
  void set_busy(SimTime now, bool busy);
  // Closes the window at `now`, returns its busy fraction and opens the next one.
  double close_window(SimTime now);
  bool busy() const { return busy_; }

 private:
  SimTime window_begin_{0};
  SimTime since_{0};
  SimTime busy_time_{0};
  bool busy_ = false;
};

// Minimum spacing between generated packets under DCC.
double dcc_interval(double t_g_s, double cbr);

struct DccState {
  double cbr_estimate = 0.0;
  double interval_s = 0.1;
  SimTime last_generation = kNever;

  // Feeds the CBR of the last completed window.
  void update(double cbr, double t_g_s);
};

}  // namespace coexsim::dot11p
