#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>

namespace coexsim {

// Simulation clock. Integer nanoseconds keep event ordering exact and
// reproducible across platforms.
using SimTime = std::chrono::nanoseconds;

constexpr SimTime kNever = SimTime::max();

inline constexpr SimTime micros(std::int64_t us) { return std::chrono::microseconds(us); }
inline constexpr SimTime millis(std::int64_t ms) { return std::chrono::milliseconds(ms); }

inline SimTime from_seconds(double s) {
  return SimTime(static_cast<std::int64_t>(std::llround(s * 1e9)));
}
inline constexpr double to_seconds(SimTime t) { return static_cast<double>(t.count()) * 1e-9; }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) {
  return mw > 0.0 ? 10.0 * std::log10(mw) : -std::numeric_limits<double>::infinity();
}
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) {
  return lin > 0.0 ? 10.0 * std::log10(lin) : -std::numeric_limits<double>::infinity();
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace coexsim
