#include <benchmark/benchmark.h>

#include <random>

#include "rdgauge/complexity.hpp"

using namespace rdgauge;

namespace {

LumaBlock random_block() {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> v(0, 255);
  LumaBlock b;
  for (auto& x : b) x = v(rng);
  return b;
}

void BM_Dct32(benchmark::State& state) {
  const auto b = random_block();
  for (auto _ : state) benchmark::DoNotOptimize(dct2d(b));
}
BENCHMARK(BM_Dct32);

void BM_FrameSpatialEnergy(benchmark::State& state) {
  VideoHeader h;
  h.width = static_cast<int>(state.range(0));
  h.height = h.width * 9 / 16 / 2 * 2;
  auto f = Frame::filled(h, 0, 128);
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> v(0, 255);
  for (auto& s : f.y.samples) s = static_cast<std::uint16_t>(v(rng));
  for (auto _ : state) benchmark::DoNotOptimize(frame_spatial_energy(f, 8));
}
BENCHMARK(BM_FrameSpatialEnergy)->Arg(640)->Arg(1920);

}  // namespace
