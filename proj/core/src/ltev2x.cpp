#include "coexsim/ltev2x.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "coexsim/dot11p.hpp"

namespace coexsim::lte {

Band ResourceGrid::subchannel_band(int k) const {
  const double lo = lower_guard_mhz + k * subchannel_mhz();
  return {lo, lo + subchannel_mhz()};
}

Band ResourceGrid::band(int first, int count) const {
  return {subchannel_band(first).lo_mhz, subchannel_band(first + count - 1).hi_mhz};
}

bool ResourceGrid::in_pool(std::int64_t tti_index) const {
  if (pool == PoolKind::full) return true;
  const auto phase = ((tti_index % half_pool_period) + half_pool_period) % half_pool_period;
  return phase < half_pool_active;
}

double ResourceGrid::duty_cycle() const {
  return pool == PoolKind::full ? 1.0
                                : static_cast<double>(half_pool_active) / half_pool_period;
}

std::vector<SignalSegment> emitted_signal(const LteTxOptions& options, const ResourceGrid& grid,
                                          int first_subchannel, double density_mw_per_mhz,
                                          SimTime preamble_duration) {
  if (first_subchannel < 0 || first_subchannel >= grid.start_positions())
    throw std::out_of_range("subchannel allocation outside the pool");
  const Band used = grid.band(first_subchannel, grid.subchannels_per_packet);
  const SimTime end = grid.signal_duration();
  if (!options.preamble_insertion) return {{SimTime::zero(), end, used, density_mw_per_mhz, false}};
  return {{SimTime::zero(), preamble_duration, grid.pool_band(), density_mw_per_mhz, true},
          {preamble_duration, end, used, density_mw_per_mhz, false}};
}

int draw_counter(const SpsConfig& cfg, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(cfg.counter_min, cfg.counter_max);
  return d(rng);
}

std::optional<Resource> SpsProcess::secondary() const {
  if (!active || !harq_offset) return std::nullopt;
  return Resource{next.tti + *harq_offset, harq_subchannel};
}

KeepDecision keep_or_reselect(SpsProcess& process, const SpsConfig& cfg, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(cfg.keep_probability);
  if (keep(rng)) {
    process.counter = draw_counter(cfg, rng);
    return KeepDecision::keep;
  }
  return KeepDecision::reselect;
}

namespace {

struct Candidate {
  Resource r;
  double max_rsrp_dbm = -kInf;
  double rssi_mw = 0.0;
};

bool overlaps(int a, int na, int b, int nb) { return a < b + nb && b < a + na; }

// Highest RSRP among decoded reservations that collide with the candidate
// when both repeat with their own periodicity.
void mark_reservations(std::vector<Candidate>& cands, const SensingDb& db, const ResourceGrid& grid,
                       int own_rri, std::int64_t first_tti, std::int64_t last_tti) {
  if (cands.empty()) return;
  // Index candidates by TTI for direct lookup.
  const auto span = static_cast<std::size_t>(last_tti - first_tti + 1);
  std::vector<std::vector<std::size_t>> by_tti(span);
  for (std::size_t i = 0; i < cands.size(); ++i)
    by_tti[static_cast<std::size_t>(cands[i].r.tti - first_tti)].push_back(i);

  const int repeats = std::max(1, 1000 / std::max(own_rri, 1));
  for (const auto& res : db.reservations()) {
    if (res.rri_ms <= 0) continue;
    auto hit = [&](std::int64_t cand_tti) {
      if (cand_tti < first_tti || cand_tti > last_tti) return;
      for (auto i : by_tti[static_cast<std::size_t>(cand_tti - first_tti)]) {
        auto& c = cands[i];
        if (overlaps(c.r.subchannel, grid.subchannels_per_packet, res.subchannel, res.count))
          c.max_rsrp_dbm = std::max(c.max_rsrp_dbm, res.rsrp_dbm);
      }
    };
    if (res.rri_ms == own_rri) {
      // Same period: only the phase matters.
      std::int64_t t = res.tti + res.rri_ms;
      if (t < first_tti) t += ((first_tti - t + res.rri_ms - 1) / res.rri_ms) * res.rri_ms;
      for (; t <= last_tti; t += res.rri_ms) hit(t);
      continue;
    }
    const std::int64_t horizon = last_tti + static_cast<std::int64_t>(repeats - 1) * own_rri;
    for (std::int64_t t = res.tti + res.rri_ms; t <= horizon; t += res.rri_ms) {
      if (t < first_tti) continue;
      for (int j = 0; j < repeats; ++j) hit(t - static_cast<std::int64_t>(j) * own_rri);
    }
  }
}

void rank_rssi(std::vector<Candidate>& cands, const SensingDb& db, const ResourceGrid& grid,
               const SpsConfig& cfg) {
  for (auto& c : cands) {
    double sum = 0.0;
    int n = 0;
    for (int j = 1; j <= cfg.rssi_periods; ++j) {
      const std::int64_t t = c.r.tti - static_cast<std::int64_t>(j) * 100;
      for (int k = 0; k < grid.subchannels_per_packet; ++k) {
        const double v = db.rssi(t, c.r.subchannel + k);
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
      }
    }
    c.rssi_mw = n > 0 ? sum / n : 0.0;
  }
}

std::optional<Resource> choose(std::vector<Candidate> cands, const SensingDb& db,
                               const ResourceGrid& grid, const SpsConfig& cfg, int own_rri,
                               std::int64_t first_tti, std::int64_t last_tti,
                               std::mt19937_64& rng, SelectionStats* stats) {
  if (cands.empty()) return std::nullopt;
  mark_reservations(cands, db, grid, own_rri, first_tti, last_tti);
  const std::size_t total = cands.size();
  const double need = cfg.min_candidate_fraction * static_cast<double>(total);

  double highest = -kInf;
  for (const auto& c : cands) highest = std::max(highest, c.max_rsrp_dbm);
  double th = cfg.rsrp_threshold_dbm;
  auto survivors = [&] {
    return static_cast<std::size_t>(std::count_if(
        cands.begin(), cands.end(), [&](const Candidate& c) { return c.max_rsrp_dbm < th; }));
  };
  std::size_t left = survivors();
  while (static_cast<double>(left) < need && th <= highest) {
    th += cfg.relax_step_db;
    left = survivors();
  }
  std::erase_if(cands, [&](const Candidate& c) { return !(c.max_rsrp_dbm < th); });
  if (stats) *stats = {total, cands.size(), th};
  if (cands.empty()) return std::nullopt;

  rank_rssi(cands, db, grid, cfg);
  // random order among equal RSSI, otherwise an unsensed window favours early TTIs
  std::shuffle(cands.begin(), cands.end(), rng);
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.rssi_mw < b.rssi_mw; });
  const auto best = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(cfg.best_fraction * static_cast<double>(total))), 1,
      cands.size());
  std::uniform_int_distribution<std::size_t> pick(0, best - 1);
  return cands[pick(rng)].r;
}

}  // namespace

Resource sps_select(const SensingDb& db, const ResourceGrid& grid, const SpsConfig& cfg,
                    std::int64_t now_tti, std::mt19937_64& rng, SelectionStats* stats) {
  const int window = std::min(cfg.rri_ms, 100);
  const std::int64_t first = now_tti + 1;
  const std::int64_t last = now_tti + window;
  std::vector<Candidate> cands;
  for (std::int64_t t = first; t <= last; ++t) {
    if (!grid.in_pool(t)) continue;
    for (int k = 0; k < grid.start_positions(); ++k) cands.push_back({{t, k}});
  }
  auto r = choose(std::move(cands), db, grid, cfg, cfg.rri_ms, first, last, rng, stats);
  if (!r) throw std::logic_error("selection window holds no pool resource");
  return *r;
}

std::optional<Resource> harq_resource(const Resource& primary, const SensingDb& db,
                                      const ResourceGrid& grid, const SpsConfig& cfg,
                                      std::mt19937_64& rng) {
  const std::int64_t first = primary.tti + 1;
  const std::int64_t last = primary.tti + cfg.harq_window_ttis;
  std::vector<Candidate> cands;
  for (std::int64_t t = first; t <= last; ++t) {
    if (!grid.in_pool(t)) continue;
    for (int k = 0; k < grid.start_positions(); ++k) cands.push_back({{t, k}});
  }
  return choose(std::move(cands), db, grid, cfg, cfg.rri_ms, first, last, rng, nullptr);
}

double cbr_lte(std::span<const double> subchannel_rssi_dbm, double threshold_dbm) {
  if (subchannel_rssi_dbm.empty()) return 0.0;
  const auto busy = std::count_if(subchannel_rssi_dbm.begin(), subchannel_rssi_dbm.end(),
                                  [&](double v) { return v > threshold_dbm; });
  return static_cast<double>(busy) / static_cast<double>(subchannel_rssi_dbm.size());
}

double cr_limit(double cbr, CcVariant variant) {
  if (variant == CcVariant::standard) {
    if (cbr <= 0.3) return 1.0;
    if (cbr <= 0.65) return 0.03;
    if (cbr <= 0.8) return 0.006;
    return 0.003;
  }
  if (cbr <= 0.15) return 1.0;
  if (cbr <= 0.325) return 0.015;
  if (cbr <= 0.4) return 0.003;
  return 0.0015;
}

CcDecision apply_cc(const LteCcState& state, double used_subchannel_ttis, double t_g_s,
                    int subchannels_per_tx, double budget_scale) {
  CcDecision d;
  d.min_interval_s = t_g_s;
  if (state.cr_limit >= 1.0) return d;
  const double budget = state.cr_limit * budget_scale;
  const double per_copy = subchannels_per_tx;
  if (used_subchannel_ttis + 2.0 * per_copy <= budget) return d;
  d.ntx = 1;
  if (used_subchannel_ttis + per_copy <= budget) return d;
  d.min_interval_s = dot11p::dcc_interval(t_g_s, state.cbr_estimate);
  d.generation_allowed = used_subchannel_ttis < budget;
  return d;
}

void OccupancyLog::record(SimTime t, int subchannel_ttis) {
  entries_.emplace_back(t, subchannel_ttis);
  total_ += subchannel_ttis;
}

void OccupancyLog::expire(SimTime now, SimTime window) {
  while (!entries_.empty() && entries_.front().first + window <= now) {
    total_ -= entries_.front().second;
    entries_.pop_front();
  }
}

double OccupancyLog::used(SimTime now, SimTime window) {
  expire(now, window);
  return total_;
}

double OccupancyLog::ratio(SimTime now, double total_per_window, SimTime window) {
  return used(now, window) / total_per_window;
}

SimTime OccupancyLog::time_until_below(SimTime now, double target, SimTime window) {
  expire(now, window);
  double left = total_;
  if (left <= target) return now;
  for (const auto& [t, n] : entries_) {
    left -= n;
    if (left <= target) return t + window;
  }
  return now + window;
}

}  // namespace coexsim::lte
