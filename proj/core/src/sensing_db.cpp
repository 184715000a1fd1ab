#include <cmath>
#include <limits>
#include <stdexcept>

#include "coexsim/ltev2x.hpp"

namespace coexsim::lte {

SensingDb::SensingDb(int subchannels, int history_ttis)
    : subchannels_(subchannels), history_(history_ttis),
      rssi_mw_(static_cast<std::size_t>(subchannels) * history_ttis,
               std::numeric_limits<double>::quiet_NaN()),
      tag_(static_cast<std::size_t>(history_ttis), -1) {
  if (subchannels <= 0 || history_ttis <= 0) throw std::invalid_argument("empty sensing grid");
}

std::size_t SensingDb::slot(std::int64_t tti) const {
  const auto h = static_cast<std::int64_t>(history_);
  return static_cast<std::size_t>(((tti % h) + h) % h);
}

void SensingDb::open(std::int64_t tti) {
  const auto s = slot(tti);
  if (tag_[s] == tti) return;
  tag_[s] = tti;
  for (int k = 0; k < subchannels_; ++k) rssi_mw_[s * subchannels_ + k] = 0.0;
}

void SensingDb::add_rssi(std::int64_t tti, int subchannel, double mw) {
  const auto s = slot(tti);
  if (tag_[s] != tti) return;
  rssi_mw_[s * subchannels_ + subchannel] += mw;  // NaN stays NaN
}

void SensingDb::mark_unsensed(std::int64_t tti) {
  open(tti);
  const auto s = slot(tti);
  for (int k = 0; k < subchannels_; ++k)
    rssi_mw_[s * subchannels_ + k] = std::numeric_limits<double>::quiet_NaN();
}

double SensingDb::rssi(std::int64_t tti, int subchannel) const {
  const auto s = slot(tti);
  if (tag_[s] != tti) return std::numeric_limits<double>::quiet_NaN();
  return rssi_mw_[s * subchannels_ + subchannel];
}

bool SensingDb::sensed(std::int64_t tti) const {
  const auto s = slot(tti);
  return tag_[s] == tti && !std::isnan(rssi_mw_[s * subchannels_]);
}

void SensingDb::add_reservation(const Reservation& r) { reservations_.push_back(r); }

void SensingDb::prune(std::int64_t now_tti) {
  while (!reservations_.empty() && reservations_.front().tti <= now_tti - history_)
    reservations_.pop_front();
}

}  // namespace coexsim::lte
