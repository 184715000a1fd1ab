#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "coexsim/ltev2x.hpp"

using namespace coexsim;
using namespace coexsim::lte;

TEST(CrLimit, Brackets) {
  EXPECT_EQ(cr_limit(0.2, CcVariant::standard), 1.0);
  EXPECT_EQ(cr_limit(0.5, CcVariant::standard), 0.03);
  EXPECT_EQ(cr_limit(0.7, CcVariant::standard), 0.006);
  EXPECT_EQ(cr_limit(0.9, CcVariant::standard), 0.003);
  EXPECT_EQ(cr_limit(0.1, CcVariant::modified), 1.0);
  EXPECT_EQ(cr_limit(0.2, CcVariant::modified), 0.015);
  EXPECT_EQ(cr_limit(0.35, CcVariant::modified), 0.003);
  EXPECT_EQ(cr_limit(0.5, CcVariant::modified), 0.0015);
}

TEST(CrLimit, NonIncreasingInCbr) {
  for (auto v : {CcVariant::standard, CcVariant::modified}) {
    double prev = 1.0;
    for (double cbr = 0.0; cbr <= 1.0; cbr += 0.005) {
      EXPECT_LE(cr_limit(cbr, v), prev);
      prev = cr_limit(cbr, v);
    }
  }
}

TEST(ApplyCc, Steps) {
  LteCcState st;
  st.cbr_estimate = 0.5;
  st.cr_limit = 0.03;  // 150 subchannel-TTIs per second
  auto d = apply_cc(st, 10.0, 0.1);
  EXPECT_EQ(d.ntx, 2);
  EXPECT_TRUE(d.generation_allowed);
  d = apply_cc(st, 147.0, 0.1);
  EXPECT_EQ(d.ntx, 1);
  EXPECT_TRUE(d.generation_allowed);
  EXPECT_EQ(d.min_interval_s, 0.1);
  st.cbr_estimate = 0.7;
  d = apply_cc(st, 150.0, 0.1);
  EXPECT_EQ(d.ntx, 1);
  EXPECT_FALSE(d.generation_allowed);
  EXPECT_EQ(d.min_interval_s, 1.0);
  st.cr_limit = 1.0;
  EXPECT_EQ(apply_cc(st, 1e6, 0.1).ntx, 2);
}

TEST(Grid, HalfPoolMask) {
  ResourceGrid g;
  g.pool = PoolKind::half;
  int active = 0;
  for (std::int64_t t = 0; t < 1000; ++t) active += g.in_pool(t);
  EXPECT_EQ(active, 500);
  EXPECT_EQ(g.duty_cycle(), 0.5);
  EXPECT_TRUE(g.in_pool(24));
  EXPECT_FALSE(g.in_pool(25));
  EXPECT_TRUE(g.in_pool(-50));
  EXPECT_EQ(ResourceGrid{}.duty_cycle(), 1.0);
}

TEST(EmittedSignal, LegacyOccupiesTwoSubchannels) {
  const ResourceGrid g;
  const auto segs = emitted_signal({}, g, 1, 1.0);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].band.lo_mhz, g.subchannel_band(1).lo_mhz);
  EXPECT_EQ(segs[0].band.hi_mhz, g.subchannel_band(2).hi_mhz);
  EXPECT_EQ(segs[0].end, g.signal_duration());
  EXPECT_THROW(emitted_signal({}, g, 4, 1.0), std::out_of_range);
}

TEST(EmittedSignal, PreambleLeakageAndGap) {
  const ResourceGrid g;
  LteTxOptions o;
  o.preamble_insertion = true;
  const auto segs = emitted_signal(o, g, 0, 1.0);
  auto energy = [&](int k) {
    double e = 0.0;
    for (const auto& s : segs) e += s.power_in(g.subchannel_band(k)) * static_cast<double>((s.end - s.begin).count());
    return e;
  };
  EXPECT_NEAR(energy(4) / energy(0), 40.0 / 928.6, 1e-4);
  EXPECT_NEAR(energy(4) / energy(0), 0.043, 0.001);
  for (auto opt : {LteTxOptions{}, o}) {
    SimTime last{0};
    for (const auto& s : emitted_signal(opt, g, 2, 1.0)) last = std::max(last, s.end);
    EXPECT_NEAR(static_cast<double>((g.tti - last).count()) / 1e3, 71.4, 0.1);
  }
}

TEST(SensingDb, Slots) {
  SensingDb db(5, 1000);
  EXPECT_TRUE(std::isnan(db.rssi(3, 0)));
  db.open(3);
  db.add_rssi(3, 1, 2.0);
  db.add_rssi(3, 1, 1.0);
  EXPECT_EQ(db.rssi(3, 1), 3.0);
  EXPECT_TRUE(db.sensed(3));
  EXPECT_TRUE(std::isnan(db.rssi(1003, 1)));
  db.open(1003);
  EXPECT_TRUE(std::isnan(db.rssi(3, 1)));
  db.mark_unsensed(1004);
  db.add_rssi(1004, 0, 1.0);
  EXPECT_FALSE(db.sensed(1004));
  db.add_reservation({10, 0, 2, 100, -90.0, 1});
  db.prune(1009);
  EXPECT_EQ(db.reservations().size(), 1u);
  db.prune(1010);
  EXPECT_TRUE(db.reservations().empty());
}

TEST(SpsSelect, UniformOnEmptyHistory) {
  const SensingDb db;
  const ResourceGrid g;
  const SpsConfig cfg;
  std::mt19937_64 rng(1);
  std::map<std::pair<std::int64_t, int>, int> counts;
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto r = sps_select(db, g, cfg, 1000, rng);
    ASSERT_GE(r.tti, 1001);
    ASSERT_LE(r.tti, 1100);
    ++counts[{r.tti, r.subchannel}];
  }
  const int cells = 100 * g.start_positions();
  ASSERT_EQ(static_cast<int>(counts.size()), cells);
  const double expected = static_cast<double>(n) / cells;
  double chi2 = 0.0;
  for (const auto& [k, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(cells - 1);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01);
}

TEST(SpsSelect, ReservedResourceExcluded) {
  SensingDb db;
  db.add_reservation({950, 0, 2, 100, -90.0, 7});
  const ResourceGrid g;
  const SpsConfig cfg;
  std::mt19937_64 rng(2);
  SelectionStats stats;
  for (int i = 0; i < 20000; ++i) {
    const auto r = sps_select(db, g, cfg, 1000, rng, &stats);
    EXPECT_FALSE(r.tti == 1050 && r.subchannel <= 1);
  }
  EXPECT_EQ(stats.total, 400u);
  EXPECT_EQ(stats.after_exclusion, 398u);
  EXPECT_EQ(stats.threshold_dbm, -110.0);
}

TEST(SpsSelect, WeakReservationIgnored) {
  SensingDb db;
  db.add_reservation({950, 0, 2, 100, -115.0, 7});
  SelectionStats stats;
  std::mt19937_64 rng(3);
  sps_select(db, ResourceGrid{}, SpsConfig{}, 1000, rng, &stats);
  EXPECT_EQ(stats.after_exclusion, 400u);
}

TEST(SpsSelect, RelaxesWhenCrowded) {
  SensingDb db;
  const ResourceGrid g;
  for (int t = 900; t < 995; ++t) db.add_reservation({t, 0, 5, 100, -100.0, 1});
  std::mt19937_64 rng(4);
  SelectionStats stats;
  const auto r = sps_select(db, g, SpsConfig{}, 999, rng, &stats);
  EXPECT_GT(stats.threshold_dbm, -100.0);
  EXPECT_GE(r.tti, 1000);
}

TEST(SpsSelect, HalfPoolStaysInMask) {
  const SensingDb db;
  ResourceGrid g;
  g.pool = PoolKind::half;
  std::mt19937_64 rng(5);
  for (std::int64_t now = 0; now < 3000; now += 7) {
    const auto r = sps_select(db, g, SpsConfig{}, now, rng);
    EXPECT_TRUE(g.in_pool(r.tti));
    const auto h = harq_resource(r, db, g, SpsConfig{}, rng);
    if (h) EXPECT_TRUE(g.in_pool(h->tti));
  }
}

TEST(SpsSelect, PrefersLowRssi) {
  SensingDb db;
  const ResourceGrid g;
  // history with every candidate loud except TTI offset 37, subchannels 3-4
  for (std::int64_t t = 0; t < 1000; ++t) {
    db.open(t);
    for (int k = 0; k < 5; ++k) db.add_rssi(t, k, (t % 100 == 37 && k >= 3) ? 1e-12 : 1e-9);
  }
  SpsConfig cfg;
  cfg.best_fraction = 0.001;
  std::mt19937_64 rng(6);
  const auto r = sps_select(db, g, cfg, 999, rng);
  EXPECT_EQ(r.tti, 1037);
  EXPECT_EQ(r.subchannel, 3);
}

TEST(SpsSelect, UniformRssiOffsetKeepsSelection) {
  SensingDb a, b;
  std::mt19937_64 fill(7);
  std::uniform_real_distribution<double> u(1e-11, 1e-9);
  for (std::int64_t t = 0; t < 1000; ++t) {
    a.open(t);
    b.open(t);
    for (int k = 0; k < 5; ++k) {
      const double v = u(fill);
      a.add_rssi(t, k, v);
      b.add_rssi(t, k, v + 1e-14);
    }
  }
  std::mt19937_64 ra(8), rb(8);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sps_select(a, {}, {}, 999, ra), sps_select(b, {}, {}, 999, rb));
}

TEST(Harq, SecondaryWithinWindow) {
  const SensingDb db;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const Resource p{500, 2};
    const auto h = harq_resource(p, db, {}, {}, rng);
    ASSERT_TRUE(h);
    EXPECT_GE(h->tti, 501);
    EXPECT_LE(h->tti, 515);
  }
}

TEST(Sps, KeepProbabilityAndCounter) {
  std::mt19937_64 rng(10);
  const SpsConfig cfg;
  int keeps = 0;
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    SpsProcess p;
    p.next = {123, 1};
    if (keep_or_reselect(p, cfg, rng) == KeepDecision::keep) {
      ++keeps;
      EXPECT_GE(p.counter, 5);
      EXPECT_LE(p.counter, 15);
      EXPECT_EQ(p.next, (Resource{123, 1}));
    } else {
      EXPECT_EQ(p.counter, 0);
    }
  }
  EXPECT_NEAR(static_cast<double>(keeps) / n, 0.5, 0.01);
}

TEST(Sps, Secondary) {
  SpsProcess p;
  p.next = {100, 0};
  p.active = true;
  EXPECT_FALSE(p.secondary());
  p.harq_offset = 4;
  p.harq_subchannel = 3;
  EXPECT_EQ(*p.secondary(), (Resource{104, 3}));
}

TEST(CbrLte, Examples) {
  const std::vector<double> silent(500, -120.0);
  EXPECT_EQ(cbr_lte(silent), 0.0);
  const std::vector<double> full(500, -80.0);
  EXPECT_EQ(cbr_lte(full), 1.0);
  std::vector<double> two(500, -120.0);
  for (std::size_t i = 0; i < two.size(); i += 5) two[i] = two[i + 1] = -90.0;
  EXPECT_NEAR(cbr_lte(two), 0.4, 1e-12);
}

TEST(Occupancy, RollingWindow) {
  OccupancyLog log;
  log.record(millis(0), 4);
  log.record(millis(500), 2);
  EXPECT_EQ(log.used(millis(999)), 6.0);
  EXPECT_EQ(log.used(millis(1000)), 2.0);
  EXPECT_NEAR(log.ratio(millis(1000)), 2.0 / 5000.0, 1e-15);
  EXPECT_EQ(log.time_until_below(millis(1000), 2.0), millis(1000));
  EXPECT_EQ(log.time_until_below(millis(1000), 1.0), millis(1500));
}
