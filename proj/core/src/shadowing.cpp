#include <cmath>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

#include "coexsim/propagation.hpp"

namespace coexsim::propagation {

ShadowingField::ShadowingField(ShadowingParams params, std::uint32_t stations)
    : params_(params), stations_(stations),
      links_(static_cast<std::size_t>(stations) * stations) {
  if (params_.std_dev_db < 0.0) throw std::invalid_argument("negative shadowing std dev");
  if (!(params_.decorrelation_distance_m > 0.0))
    throw std::invalid_argument("decorrelation distance must be positive");
}

ShadowingField::LinkState& ShadowingField::slot(LinkId link) {
  if (link.tx >= stations_ || link.rx >= stations_) throw std::out_of_range("link outside field");
  return links_[static_cast<std::size_t>(link.tx) * stations_ + link.rx];
}

double ShadowingField::current(LinkId link) const {
  if (link.tx >= stations_ || link.rx >= stations_) throw std::out_of_range("link outside field");
  return links_[static_cast<std::size_t>(link.tx) * stations_ + link.rx].value;
}

namespace {

// Boost's ziggurat sampler keeps no cached variate between calls (libstdc++'s
// polar method does), so one stream can serve many links.
double unit_normal(std::mt19937_64& rng) {
  boost::random::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

}  // namespace

double ShadowingField::sample(LinkId link, double moved_m, std::mt19937_64& rng) {
  return update(slot(link), moved_m, unit_normal(rng));
}

double ShadowingField::sample_at(LinkId link, double odometer_m, std::mt19937_64& rng) {
  auto& s = slot(link);
  const double moved = s.initialized ? odometer_m - s.odometer : 0.0;
  s.odometer = odometer_m;
  return update(s, moved, unit_normal(rng));
}

double ShadowingField::update(LinkState& s, double moved_m, double unit_normal) const {
  if (!s.initialized) {
    s.initialized = true;
    s.value = params_.std_dev_db * unit_normal;
    return s.value;
  }
  const double rho = std::exp(-std::abs(moved_m) / params_.decorrelation_distance_m);
  if (rho == 1.0) return s.value;
  s.value = rho * s.value + std::sqrt(1.0 - rho * rho) * params_.std_dev_db * unit_normal;
  return s.value;
}

}  // namespace coexsim::propagation
