#include "coexsim/dot11p.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coexsim/spectrum.hpp"

namespace coexsim::dot11p {

void Dot11pConfig::validate() const {
  if (aifs <= SimTime::zero() || slot <= SimTime::zero() || cbr_window <= SimTime::zero() ||
      preamble_duration <= SimTime::zero() || symbol <= SimTime::zero())
    throw std::invalid_argument("802.11p durations must be positive");
  if (!(data_rate_mbps > 0.0)) throw std::invalid_argument("data rate must be positive");
}

SimTime frame_duration(std::size_t payload_bytes, const Dot11pConfig& cfg) {
  const double bits_per_symbol = cfg.data_rate_mbps * static_cast<double>(cfg.symbol.count()) / 1e3;
  const auto per_symbol = static_cast<std::size_t>(std::llround(bits_per_symbol));
  const std::size_t bits = 16 + 6 + 8 * payload_bytes;
  const std::size_t symbols = (bits + per_symbol - 1) / per_symbol;
  return cfg.preamble_duration + cfg.symbol * static_cast<std::int64_t>(symbols);
}

bool preamble_decodable(double power_dbm, double sinr_db, const Dot11pConfig& cfg) {
  return power_dbm >= cfg.preamble_detect_threshold_dbm && sinr_db >= cfg.preamble_sinr_threshold_db;
}

bool cca_busy(double in_band_power_dbm, SimTime now, SimTime nav_until, const Dot11pConfig& cfg) {
  return in_band_power_dbm >= cfg.cca_energy_threshold_dbm || now < nav_until;
}

void CsmaMac::draw_backoff(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> cw(0, static_cast<int>(cfg_.cw_max_slots));
  backoff_ = cw(rng);
  phase_ = Phase::backoff;
}

void CsmaMac::begin_access(SimTime now, bool busy, bool force_backoff, std::mt19937_64& rng) {
  phase_ = Phase::deferring;
  backoff_ = -1;
  channel_busy_ = busy;
  anchor_ = now;
  if (busy || force_backoff) draw_backoff(rng);
}

bool CsmaMac::enqueue(const QueuedPacket& pkt, SimTime now, bool busy, std::mt19937_64& rng) {
  const bool replaced = queued_.has_value();
  queued_ = pkt;
  if (!replaced && phase_ == Phase::idle) begin_access(now, busy, false, rng);
  return replaced;
}

Action CsmaMac::step(SimTime now, bool busy, std::mt19937_64& rng) {
  if (!queued_ || phase_ == Phase::transmitting || phase_ == Phase::idle) return Action::wait;
  if (busy) {
    if (channel_busy_) return Action::wait;
    channel_busy_ = true;
    if (backoff_ < 0) {
      draw_backoff(rng);
      return Action::wait;
    }
    const auto elapsed = now - anchor_ - cfg_.aifs;
    if (elapsed > SimTime::zero()) {
      const auto slots = std::min<std::int64_t>(elapsed / cfg_.slot, backoff_);
      backoff_ -= static_cast<int>(slots);
      if (slots > 0) return Action::decrement_backoff;
    }
    return Action::wait;
  }
  if (channel_busy_) {
    channel_busy_ = false;
    anchor_ = now;
  }
  if (now >= deadline()) {
    in_flight_ = queued_;
    queued_.reset();
    phase_ = Phase::transmitting;
    backoff_ = -1;
    return Action::start_tx;
  }
  return Action::wait;
}

void CsmaMac::on_tx_end(SimTime now, bool busy, std::mt19937_64& rng) {
  in_flight_.reset();
  phase_ = Phase::idle;
  if (queued_) begin_access(now, busy, true, rng);
}

SimTime CsmaMac::deadline() const {
  if (!queued_ || phase_ == Phase::transmitting || phase_ == Phase::idle || channel_busy_)
    return kNever;
  return anchor_ + cfg_.aifs + cfg_.slot * std::max(backoff_, 0);
}

double cbr_11p(std::span<const PowerSample> trace, SimTime window_begin, SimTime window_end,
               double busy_threshold_dbm) {
  if (window_end <= window_begin) throw std::invalid_argument("empty CBR window");
  double busy = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].power_dbm < busy_threshold_dbm) continue;
    const SimTime end = i + 1 < trace.size() ? trace[i + 1].t : window_end;
    busy += time_overlap(trace[i].t, end, window_begin, window_end);
  }
  return busy / static_cast<double>((window_end - window_begin).count());
}

void BusyRatioMeter::reset(SimTime window_begin) {
  window_begin_ = window_begin;
  since_ = window_begin;
  busy_time_ = SimTime::zero();
}

void BusyRatioMeter::set_busy(SimTime now, bool busy) {
  if (busy_) busy_time_ += now - since_;
  since_ = now;
  busy_ = busy;
}

double BusyRatioMeter::close_window(SimTime now) {
  set_busy(now, busy_);
  const auto span = now - window_begin_;
  const double frac =
      span > SimTime::zero() ? static_cast<double>(busy_time_.count()) / static_cast<double>(span.count())
                             : 0.0;
  reset(now);
  return frac;
}

double dcc_interval(double t_g_s, double cbr) {
  if (!(t_g_s > 0.0)) throw std::invalid_argument("t_g must be positive");
  if (cbr <= 0.0) return t_g_s;
  const double stretched = t_g_s * 4000.0 * (cbr - 0.62) / cbr;
  return std::max(t_g_s, std::min(1.0, stretched));
}

void DccState::update(double cbr, double t_g_s) {
  cbr_estimate = cbr;
  interval_s = dcc_interval(t_g_s, cbr);
}

}  // namespace coexsim::dot11p
