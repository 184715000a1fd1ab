#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "coexsim/simulator.hpp"

using namespace coexsim;
using namespace coexsim::sim;

namespace {

SimConfig short_run(CoexMode mode, double density, double seconds) {
  SimConfig c;
  c.mode = mode;
  c.scenario.density_11p_per_km = density;
  c.scenario.density_lte_per_km = density;
  c.duration_s = seconds;
  c.warmup_s = 1.0;
  return c;
}

void expect_same(const MetricsReport& a, const MetricsReport& b) {
  ASSERT_EQ(a.techs.size(), b.techs.size());
  EXPECT_EQ(a.events, b.events);
  for (std::size_t t = 0; t < a.techs.size(); ++t) {
    const auto& x = a.techs[t];
    const auto& y = b.techs[t];
    EXPECT_EQ(x.generated, y.generated);
    EXPECT_EQ(x.transmissions, y.transmissions);
    EXPECT_EQ(x.cbr_sum, y.cbr_sum);
    ASSERT_EQ(x.prr.size(), y.prr.size());
    for (std::size_t i = 0; i < x.prr.size(); ++i) {
      EXPECT_EQ(x.prr.decoded(i), y.prr.decoded(i));
      EXPECT_EQ(x.prr.samples(i), y.prr.samples(i));
    }
    for (std::size_t i = 0; i < x.da.size(); ++i) EXPECT_EQ(x.da.count(i), y.da.count(i));
  }
}

double mean_prr(const TechMetrics& m, double lo, double hi) {
  std::uint64_t d = 0, n = 0;
  for (std::size_t i = 0; i < m.prr.size(); ++i)
    if (m.prr.low(i) >= lo && m.prr.high(i) <= hi) {
      d += m.prr.decoded(i);
      n += m.prr.samples(i);
    }
  return n ? static_cast<double>(d) / static_cast<double>(n) : NAN;
}

}  // namespace

TEST(Reception, DecodeRateAtSinr50) {
  const auto curve = propagation::PerCurve::dot11p_mcs2();
  const double noise = 1e-10;
  const double useful = noise * db_to_linear(curve.sinr_50_db);
  std::mt19937_64 rng(1);
  int ok = 0;
  constexpr int n = 10000;
  for (int i = 0; i < n; ++i)
    ok += reception_decision(useful, {}, noise, curve, false, rng) == ReceptionOutcome::decoded;
  EXPECT_NEAR(static_cast<double>(ok) / n, 0.5, 0.015);
}

TEST(Reception, HalfDuplex) {
  std::mt19937_64 rng(2);
  EXPECT_EQ(reception_decision(1.0, {}, 1e-12, propagation::PerCurve::lte_mcs11(), true, rng),
            ReceptionOutcome::half_duplex);
}

TEST(Reception, SplitInterferenceEquivalent) {
  const std::vector<propagation::WeightedInterferer> one{{2e-10, 1.0}}, two{{2e-10, 0.5}, {2e-10, 0.5}};
  const auto curve = propagation::PerCurve::dot11p_mcs2();
  std::mt19937_64 a(3), b(3);
  for (int i = 0; i < 1000; ++i)
    EXPECT_EQ(reception_decision(5e-10, one, 1e-10, curve, false, a),
              reception_decision(5e-10, two, 1e-10, curve, false, b));
}

TEST(SimConfig, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.duration_s = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.mode = CoexMode::only_11p;
  c.scenario.density_11p_per_km = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.da_range_m = 800.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SimConfig, PreambleOverride) {
  SimConfig c;
  c.mode = CoexMode::only_lte;
  EXPECT_TRUE(c.effective_traits().lte.preamble_insertion);
  c.preamble_insertion = false;
  EXPECT_FALSE(c.effective_traits().lte.preamble_insertion);
}

TEST(Simulator, Deterministic) {
  const auto cfg = short_run(CoexMode::preamble, 50.0, 1.5);
  const auto a = run(cfg, 9);
  const auto b = run(cfg, 9);
  expect_same(a, b);
  const auto c = run(cfg, 10);
  EXPECT_NE(a.techs[0].transmissions + a.techs[1].transmissions * 7,
            c.techs[0].transmissions + c.techs[1].transmissions * 7);
}

TEST(Simulator, OnlyTechnologyPresent) {
  const auto r11 = run(short_run(CoexMode::only_11p, 20.0, 1.0), 1);
  ASSERT_EQ(r11.techs.size(), 1u);
  EXPECT_EQ(r11.techs[0].tech, Tech::dot11p);
  EXPECT_EQ(r11.techs[0].vehicles, 40u);
  const auto rl = run(short_run(CoexMode::only_lte, 20.0, 1.0), 1);
  ASSERT_EQ(rl.techs.size(), 1u);
  EXPECT_EQ(rl.techs[0].tech, Tech::lte);
}

TEST(Simulator, PrrFallsWithDistance) {
  const auto r = run(short_run(CoexMode::only_11p, 50.0, 3.0), 2);
  const auto& m = r.techs[0];
  const double near = mean_prr(m, 0.0, 100.0), mid = mean_prr(m, 200.0, 300.0), far = mean_prr(m, 500.0, 600.0);
  EXPECT_GT(near, mid);
  EXPECT_GT(mid, far);
  EXPECT_GT(near, 0.95);
}

TEST(Simulator, NoHarqSendsOneCopy) {
  const auto r = run(short_run(CoexMode::preamble_noharq, 30.0, 2.0), 3);
  const auto* lte = r.find(Tech::lte);
  ASSERT_NE(lte, nullptr);
  EXPECT_GT(lte->packets_sent, 0u);
  EXPECT_EQ(lte->ntx(), 1.0);
}

TEST(Simulator, UncongestedHarqSendsTwoCopies) {
  const auto r = run(short_run(CoexMode::only_lte, 30.0, 2.0), 4);
  EXPECT_NEAR(r.techs[0].ntx(), 2.0, 0.02);
}

TEST(Simulator, LteRateFollowsCamRules) {
  const auto r = run(short_run(CoexMode::only_lte, 30.0, 4.0), 5);
  EXPECT_NEAR(r.techs[0].msgs_per_s(), 4.86, 0.25);
}

TEST(Simulator, PeriodicVariantRate) {
  const auto r = run(short_run(CoexMode::legacy_periodic, 20.0, 4.0), 6);
  for (const auto& m : r.techs) EXPECT_NEAR(m.msgs_per_s(), 5.0, 0.1) << to_string(m.tech);
}
