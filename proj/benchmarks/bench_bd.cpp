#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "rdgauge/bd.hpp"

using namespace rdgauge;

namespace {

RDCurve make_curve(std::mt19937_64& rng, int n, double shift) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RDCurve c;
  double lr = 2.5 + shift, q = 60;
  for (int i = 0; i < n; ++i) {
    c.points.push_back({std::pow(10.0, lr), q});
    lr += 0.1 + 0.3 * u(rng);
    q += 1 + 5 * u(rng);
  }
  return c;
}

void BM_BdRate(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto a = make_curve(rng, static_cast<int>(state.range(0)), 0.0);
  const auto b = make_curve(rng, static_cast<int>(state.range(0)), 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(bd_rate(a, b).value);
}
BENCHMARK(BM_BdRate)->Arg(4)->Arg(12)->Arg(64);

void BM_SmartBdRate(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.9, 1.1);
  const std::vector<int> ladder{500, 1000, 2000, 3000, 4000, 6000, 8000, 10000, 12000, 14000, 16000, 20000};
  std::vector<MetricRecord> a, b;
  for (int c = 0; c < state.range(0); ++c)
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      MetricRecord r;
      r.clip_id = "c" + std::to_string(c);
      r.family = "X";
      r.preset = "p";
      r.passes = 1;
      r.target_kbps = ladder[i];
      r.measured_kbps = ladder[i] * u(rng);
      r.vmaf = 60 + 3.0 * i * u(rng);
      a.push_back(r);
      r.measured_kbps *= 0.85;
      b.push_back(r);
    }
  for (auto _ : state) benchmark::DoNotOptimize(smart_bd_rate(a, b, ladder).value);
}
BENCHMARK(BM_SmartBdRate)->Arg(62);

}  // namespace

BENCHMARK_MAIN();
