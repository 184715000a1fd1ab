#include <benchmark/benchmark.h>

#include <random>

#include "coexsim/analytic_model.hpp"
#include "coexsim/ltev2x.hpp"
#include "coexsim/simulator.hpp"

using namespace coexsim;

static analytic::FreeFlowParams link(double d_u) {
  analytic::FreeFlowParams p;
  p.link_distance_m = d_u;
  return p;
}

static void BM_ClosedForm(benchmark::State& state) {
  const auto p = link(200.0);
  for (auto _ : state) benchmark::DoNotOptimize(analytic::prp_closed_form(p));
}
BENCHMARK(BM_ClosedForm);

static void BM_ExactQuadrature(benchmark::State& state) {
  const auto p = link(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(analytic::prp_exact_numeric(p));
}
BENCHMARK(BM_ExactQuadrature)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_MonteCarlo(benchmark::State& state) {
  const auto p = link(200.0);
  const auto trials = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(analytic::prp_monte_carlo(p, trials, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarlo)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_SpsSelect(benchmark::State& state) {
  lte::SensingDb db;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1e-12, 1e-9);
  for (std::int64_t t = 0; t < 1000; ++t) {
    db.open(t);
    for (int k = 0; k < 5; ++k) db.add_rssi(t, k, u(rng));
  }
  for (int i = 0; i < 100; ++i) db.add_reservation({900 + i, i % 4, 2, 100, -100.0, 1});
  for (auto _ : state) benchmark::DoNotOptimize(lte::sps_select(db, {}, {}, 999, rng));
}
BENCHMARK(BM_SpsSelect);

static void BM_Simulation(benchmark::State& state) {
  sim::SimConfig c;
  c.mode = sim::CoexMode::preamble;
  c.scenario.density_11p_per_km = c.scenario.density_lte_per_km = static_cast<double>(state.range(0));
  c.warmup_s = 1.0;
  c.duration_s = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(sim::run(c, 1));
}
BENCHMARK(BM_Simulation)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
