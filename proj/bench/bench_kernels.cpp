#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "vtd/kernels.hpp"
#include "vtd/pipeline.hpp"
#include "vtd/synth.hpp"

namespace {

using namespace vtd;

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  std::vector<double> x(n);
  for (double& v : x) v = nd(gen);
  return x;
}

// One hour of single-lead ECG at 250 Hz.
const std::vector<double>& long_signal() {
  static const auto x = noise(900000);
  return x;
}

template <auto Fn>
void bm_window_maxima(benchmark::State& state) {
  const auto& x = long_signal();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, 150));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}

template <auto Fn>
void bm_sliding_median(benchmark::State& state) {
  const std::vector<double> x(long_signal().begin(), long_signal().begin() + 90000);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, 75));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}

template <auto Fn>
void bm_squared_distances(benchmark::State& state) {
  const kernels::RowMatrix m{200000, 3, noise(600000)};
  const std::vector<double> q{0.1, -0.2, 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(Fn(m, q));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.rows));
}

template <auto Fn>
void bm_analyze_records(benchmark::State& state) {
  std::vector<EcgRecord> raw;
  for (auto& r : synth::synth_corpus(40, {0.4, 0.3, 0.3}, 3)) raw.push_back(std::move(r.record));
  const pipeline::PipelineConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(raw, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(raw.size()));
}

BENCHMARK(bm_window_maxima<kernels::serial::window_maxima>)->Name("window_maxima/serial");
BENCHMARK(bm_window_maxima<kernels::parallel::window_maxima>)->Name("window_maxima/parallel");
BENCHMARK(bm_sliding_median<kernels::serial::sliding_median>)->Name("sliding_median/serial");
BENCHMARK(bm_sliding_median<kernels::parallel::sliding_median>)->Name("sliding_median/parallel");
BENCHMARK(bm_squared_distances<kernels::serial::squared_distances>)->Name("squared_distances/serial");
BENCHMARK(bm_squared_distances<kernels::parallel::squared_distances>)->Name("squared_distances/parallel");
BENCHMARK(bm_analyze_records<pipeline::analyze_records_serial>)->Name("analyze_records/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_analyze_records<pipeline::analyze_records>)->Name("analyze_records/parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
