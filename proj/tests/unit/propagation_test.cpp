#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "coexsim/propagation.hpp"

using namespace coexsim;
using namespace coexsim::propagation;

TEST(PathLoss, Anchors) {
  const PathLossModel m;
  EXPECT_DOUBLE_EQ(m.loss_db(1.0), 20.06);
  EXPECT_NEAR(m.loss_db(100.0), 100.06, 1e-9);
  EXPECT_NEAR(m.loss_db(200.0), 112.10, 5e-3);
  EXPECT_DOUBLE_EQ(m.loss_db(0.2), 20.06);
}

TEST(PathLoss, Inverse) {
  const PathLossModel m;
  EXPECT_NEAR(m.inverse(20.06), 1.0, 1e-12);
  EXPECT_NEAR(m.inverse(94.0), 70.6, 0.05);
  EXPECT_THROW(m.inverse(10.0), std::domain_error);
}

TEST(PathLoss, RoundTripAndMonotone) {
  const PathLossModel m;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1.0, 10000.0);
  double prev = m.loss_db(1.0);
  for (double d = 1.5; d < 10000.0; d *= 1.5) {
    const double l = m.loss_db(d);
    EXPECT_GT(l, prev);
    prev = l;
  }
  for (int i = 0; i < 1000; ++i) {
    const double d = u(rng);
    EXPECT_NEAR(m.inverse(m.loss_db(d)), d, 1e-6 * d);
  }
}

TEST(PathLoss, RejectsBadBeta) { EXPECT_THROW(PathLossModel(20.0, 0.0), std::invalid_argument); }

TEST(Noise, Examples) {
  EXPECT_NEAR(noise_power_dbm(10.0, 6.0), -98.0, 1e-9);
  EXPECT_NEAR(noise_power_dbm(1.0, 0.0), -114.0, 1e-9);
  EXPECT_NEAR(noise_power_dbm(10.0, 0.0), -104.0, 1e-9);
}

TEST(Per, Anchors) {
  const auto c = PerCurve::dot11p_mcs2();
  EXPECT_NEAR(c.per(1.02), 0.5, 1e-12);
  EXPECT_NEAR(c.per(-0.8), 0.9, 0.005);
  EXPECT_LT(c.per(40.0), 1e-6);
  EXPECT_NEAR(PerCurve::lte_mcs11().per(5.15), 0.5, 1e-12);
}

TEST(Per, MonotoneAndBounded) {
  for (const auto& c : {PerCurve::dot11p_mcs2(), PerCurve::lte_mcs11()}) {
    double prev = 1.0;
    for (double s = -40.0; s <= 60.0; s += 0.25) {
      const double p = c.per(s);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      EXPECT_LE(p, prev);
      prev = p;
    }
  }
}

TEST(MeanSinr, Examples) {
  EXPECT_NEAR(mean_sinr_db(1e-9, {}, 1e-9), 0.0, 1e-12);
  const std::vector<WeightedInterferer> one{{1e-6, 1.0}};
  EXPECT_NEAR(mean_sinr_db(1e-6, one, 1e-30), 0.0, 1e-9);
  const std::vector<WeightedInterferer> halves{{1e-6, 0.5}, {1e-6, 0.5}};
  EXPECT_NEAR(mean_sinr_db(1e-6, halves, 1e-9), mean_sinr_db(1e-6, one, 1e-9), 1e-12);
  EXPECT_TRUE(std::isinf(mean_sinr_db(0.0, {}, 1e-9)));
}

TEST(Shadowing, NoMotionKeepsValue) {
  ShadowingField f({3.0, 25.0}, 4);
  std::mt19937_64 rng(1);
  const double s0 = f.sample({0, 1}, 0.0, rng);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(f.sample({0, 1}, 0.0, rng), s0);
  EXPECT_EQ(f.current({1, 0}), 0.0);
}

TEST(Shadowing, MarginalAndDecorrelation) {
  constexpr int n = 100000;
  ShadowingField f({3.0, 25.0}, 2);
  std::mt19937_64 rng(2);
  double sum = 0.0, sq = 0.0, cross = 0.0, prev = f.sample({0, 1}, 0.0, rng);
  for (int i = 0; i < n; ++i) {
    const double s = f.sample({0, 1}, 1e6, rng);
    sum += s;
    sq += s * s;
    cross += s * prev;
    prev = s;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(std::sqrt(var), 3.0, 0.05);
  EXPECT_LT(std::abs(cross / n / var), 0.02);
}

TEST(Shadowing, UpdatePreservesMarginal) {
  constexpr int n = 100000;
  ShadowingField f({3.0, 25.0}, 2);
  std::mt19937_64 rng(3);
  double sq = 0.0, cross = 0.0, prev = f.sample({0, 1}, 0.0, rng);
  for (int i = 0; i < n; ++i) {
    const double s = f.sample({0, 1}, 10.0, rng);
    sq += s * s;
    cross += s * prev;
    prev = s;
  }
  EXPECT_NEAR(std::sqrt(sq / n), 3.0, 0.06);
  EXPECT_NEAR(cross / sq, std::exp(-10.0 / 25.0), 0.02);
}

TEST(Shadowing, OdometerMatchesDelta) {
  ShadowingField a({3.0, 25.0}, 2), b({3.0, 25.0}, 2);
  std::mt19937_64 ra(4), rb(4);
  a.sample({0, 1}, 0.0, ra);
  b.sample_at({0, 1}, 5.0, rb);
  for (double odo = 5.0, step = 3.0; odo < 200.0; odo += step)
    EXPECT_DOUBLE_EQ(a.sample({0, 1}, step, ra), b.sample_at({0, 1}, odo + step, rb));
}
