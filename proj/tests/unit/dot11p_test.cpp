#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "coexsim/dot11p.hpp"

using namespace coexsim;
using namespace coexsim::dot11p;

TEST(Dot11p, FrameDuration) {
  EXPECT_EQ(frame_duration(350), micros(512));
  EXPECT_EQ(frame_duration(700), micros(984));
  EXPECT_EQ(frame_duration(0), micros(48));
}

TEST(Dot11p, PreambleDecodable) {
  EXPECT_TRUE(preamble_decodable(-98.8, -0.8));
  EXPECT_FALSE(preamble_decodable(-99.0, 10.0));
  EXPECT_FALSE(preamble_decodable(-80.0, -1.0));
}

TEST(Dot11p, Cca) {
  const SimTime now = millis(5);
  // undecodable LTE signal below the energy threshold
  EXPECT_FALSE(cca_busy(-80.0, now, SimTime::zero()));
  EXPECT_FALSE(cca_busy(-kInf, now, SimTime::zero()));
  EXPECT_TRUE(cca_busy(-60.0, now, SimTime::zero()));
  // a decodable preamble at -90 dBm declares the whole TTI, including the silent last symbol
  ASSERT_TRUE(preamble_decodable(-90.0, 8.0));
  const SimTime nav = now + millis(1);
  EXPECT_TRUE(cca_busy(-kInf, now + micros(1000) * 13 / 14 + micros(10), nav));
  EXPECT_FALSE(cca_busy(-kInf, nav, nav));
}

TEST(CsmaMac, UncontendedAccess) {
  CsmaMac mac;
  std::mt19937_64 rng(1);
  mac.enqueue({1, SimTime::zero(), 350}, SimTime::zero(), false, rng);
  EXPECT_EQ(mac.backoff_remaining(), -1);
  EXPECT_EQ(mac.deadline(), micros(110));
  EXPECT_EQ(mac.step(micros(100), false, rng), Action::wait);
  EXPECT_EQ(mac.step(micros(110), false, rng), Action::start_tx);
  EXPECT_EQ(mac.phase(), Phase::transmitting);
  EXPECT_EQ(mac.in_flight()->id, 1u);
}

TEST(CsmaMac, BackoffMean) {
  std::mt19937_64 rng(2);
  constexpr int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    CsmaMac mac;
    mac.enqueue({1, SimTime::zero(), 350}, SimTime::zero(), true, rng);
    const int b = mac.backoff_remaining();
    ASSERT_GE(b, 0);
    ASSERT_LE(b, 15);
    sum += b;
  }
  EXPECT_NEAR(sum / n, 7.5, 0.1);
}

TEST(CsmaMac, BackoffFreezesWhileBusy) {
  std::mt19937_64 rng(3);
  CsmaMac mac;
  int b = 0;
  do {
    mac = CsmaMac{};
    mac.enqueue({1, SimTime::zero(), 350}, SimTime::zero(), true, rng);
    b = mac.backoff_remaining();
  } while (b < 5);
  EXPECT_EQ(mac.deadline(), kNever);
  const SimTime idle = millis(1);
  mac.step(idle, false, rng);
  EXPECT_EQ(mac.deadline(), idle + micros(110) + micros(13) * b);
  // busy again after AIFS plus three whole slots and a fraction
  const SimTime busy = idle + micros(110) + micros(13) * 3 + micros(5);
  EXPECT_EQ(mac.step(busy, true, rng), Action::decrement_backoff);
  EXPECT_EQ(mac.backoff_remaining(), b - 3);
  EXPECT_EQ(mac.deadline(), kNever);
  const SimTime idle2 = busy + micros(300);
  mac.step(idle2, false, rng);
  EXPECT_EQ(mac.deadline(), idle2 + micros(110) + micros(13) * (b - 3));
  EXPECT_EQ(mac.step(mac.deadline(), false, rng), Action::start_tx);
}

TEST(CsmaMac, BusyDuringAifsKeepsBackoff) {
  std::mt19937_64 rng(4);
  CsmaMac mac;
  mac.enqueue({1, SimTime::zero(), 350}, SimTime::zero(), true, rng);
  const int b = mac.backoff_remaining();
  mac.step(millis(1), false, rng);
  EXPECT_EQ(mac.step(millis(1) + micros(50), true, rng), Action::wait);
  EXPECT_EQ(mac.backoff_remaining(), b);
}

TEST(CsmaMac, NewPacketReplacesWaitingOne) {
  std::mt19937_64 rng(5);
  CsmaMac mac;
  EXPECT_FALSE(mac.enqueue({1, SimTime::zero(), 350}, SimTime::zero(), true, rng));
  const int b = mac.backoff_remaining();
  EXPECT_TRUE(mac.enqueue({2, millis(100), 350}, millis(100), true, rng));
  EXPECT_EQ(mac.queued()->id, 2u);
  EXPECT_EQ(mac.backoff_remaining(), b);
}

TEST(CsmaMac, PacketQueuedDuringTxGetsBackoff) {
  std::mt19937_64 rng(6);
  CsmaMac mac;
  mac.enqueue({1, SimTime::zero(), 350}, SimTime::zero(), false, rng);
  mac.step(micros(110), false, rng);
  mac.enqueue({2, micros(200), 350}, micros(200), false, rng);
  mac.on_tx_end(micros(622), false, rng);
  EXPECT_EQ(mac.phase(), Phase::backoff);
  EXPECT_GE(mac.backoff_remaining(), 0);
  EXPECT_EQ(mac.deadline(), micros(622) + micros(110) + micros(13) * mac.backoff_remaining());
}

TEST(Cbr11p, Examples) {
  const std::vector<PowerSample> quiet{{SimTime::zero(), -95.0}};
  EXPECT_EQ(cbr_11p(quiet, SimTime::zero(), millis(100)), 0.0);
  const std::vector<PowerSample> loud{{SimTime::zero(), -80.0}};
  EXPECT_EQ(cbr_11p(loud, SimTime::zero(), millis(100)), 1.0);
  const std::vector<PowerSample> part{{SimTime::zero(), -95.0}, {millis(30), -80.0}, {millis(70), -95.0}};
  EXPECT_NEAR(cbr_11p(part, SimTime::zero(), millis(100)), 0.4, 1e-12);
}

TEST(Cbr11p, MeterMatchesTrace) {
  BusyRatioMeter m;
  m.reset(SimTime::zero());
  m.set_busy(millis(30), true);
  m.set_busy(millis(70), false);
  EXPECT_NEAR(m.close_window(millis(100)), 0.4, 1e-12);
  m.set_busy(millis(150), true);
  EXPECT_NEAR(m.close_window(millis(200)), 0.5, 1e-12);
}

TEST(Dcc, Triple) {
  EXPECT_EQ(dcc_interval(0.1, 0.62), 0.1);
  EXPECT_EQ(dcc_interval(0.1, 0.5), 0.1);
  EXPECT_EQ(dcc_interval(0.1, 0.7), 1.0);
  EXPECT_EQ(dcc_interval(0.1, 0.0), 0.1);
}

TEST(Dcc, Bounds) {
  for (double cbr = 0.0; cbr <= 1.0; cbr += 0.001) {
    const double t = dcc_interval(0.1, cbr);
    EXPECT_GE(t, 0.1);
    EXPECT_LE(t, 1.0);
  }
  DccState s;
  s.update(0.7, 0.1);
  EXPECT_EQ(s.interval_s, 1.0);
}
