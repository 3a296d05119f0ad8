// Serial reference kernels against their OpenMP counterparts. Thread count
// follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "harperlab/bandset.hpp"
#include "harperlab/chambers.hpp"
#include "harperlab/contfrac.hpp"
#include "harperlab/dimension.hpp"

using namespace harperlab;

namespace {

const BandSet& golden_spectrum() {
  static const BandSet s = spectrum_approx(ContinuedFraction({}, {1}), 16).bands;
  return s;
}

void BM_MinkowskiSerial(benchmark::State& state) {
  const auto& s = golden_spectrum();
  for (auto _ : state) benchmark::DoNotOptimize(minkowski_sum_serial(s, s));
  state.counters["bands"] = static_cast<double>(s.size());
}

void BM_MinkowskiParallel(benchmark::State& state) {
  const auto& s = golden_spectrum();
  for (auto _ : state) benchmark::DoNotOptimize(minkowski_sum(s, s));
  state.counters["bands"] = static_cast<double>(s.size());
}

void BM_ButterflySerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(butterfly_serial(state.range(0)));
}

void BM_ButterflyParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(butterfly(state.range(0)));
}

std::uint64_t count_golden(double r) { return box_count(golden_spectrum(), r); }

void BM_BoxFitSerial(benchmark::State& state) {
  const ScaleWindow w{1e-5, 0.1, static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(box_dim_fit_serial(count_golden, w));
}

void BM_BoxFitParallel(benchmark::State& state) {
  const ScaleWindow w{1e-5, 0.1, static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(box_dim_fit(count_golden, w));
}

}  // namespace

BENCHMARK(BM_MinkowskiSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinkowskiParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ButterflySerial)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ButterflyParallel)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoxFitSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoxFitParallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
