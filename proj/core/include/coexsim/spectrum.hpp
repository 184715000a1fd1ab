#pragma once

#include <algorithm>

#include "coexsim/units.hpp"

namespace coexsim {

// Frequency interval within the 10 MHz ITS channel, in MHz from the lower
// channel edge.
struct Band {
  double lo_mhz = 0.0;
  double hi_mhz = 0.0;

  double width() const { return hi_mhz - lo_mhz; }
};

inline double overlap_mhz(const Band& a, const Band& b) {
  return std::max(0.0, std::min(a.hi_mhz, b.hi_mhz) - std::max(a.lo_mhz, b.lo_mhz));
}

// A piece of an emitted signal: constant power spectral density over a band
// for a time interval relative to the start of the transmission.
struct SignalSegment {
  SimTime begin{0};
  SimTime end{0};
  Band band;
  double density_mw_per_mhz = 0.0;
  bool preamble = false;

  double power_mw() const { return density_mw_per_mhz * band.width(); }
  double power_in(const Band& rx) const { return density_mw_per_mhz * overlap_mhz(band, rx); }
};

inline double time_overlap(SimTime a0, SimTime a1, SimTime b0, SimTime b1) {
  const auto lo = std::max(a0, b0);
  const auto hi = std::min(a1, b1);
  return hi > lo ? static_cast<double>((hi - lo).count()) : 0.0;
}

}  // namespace coexsim
