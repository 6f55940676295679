// Vectorized kernels against the scalar reference, and one engine per
// configuration against a shared-analysis engine bank.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "platt/engine.h"
#include "platt/kernels.h"

namespace platt {
namespace {

constexpr int kBlock = 480;  // 10 ms at 48 kHz

std::vector<double> Noise(size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.05);
  std::vector<double> x(n);
  for (double& v : x) v = g(rng);
  return x;
}

const FilterbankSpec& Spec() {
  static const FilterbankSpec spec = DesignFilterbank();
  return spec;
}

void BM_Analyze(benchmark::State& state) {
  const Filterbank fb(Spec());
  const std::vector<double> x = Noise(kBlock);
  FilterState fs;
  BandBlock bands;
  for (auto _ : state) {
    fb.Analyze(x, fs, bands);
    benchmark::DoNotOptimize(bands.re.data());
  }
  state.SetItemsProcessed(state.iterations() * kBlock);
}
BENCHMARK(BM_Analyze);

void BM_AnalyzeReference(benchmark::State& state) {
  const std::vector<double> x = Noise(kBlock);
  FilterState fs;
  BandBlock bands;
  for (auto _ : state) {
    reference::Analyze(Spec(), x, fs, bands);
    benchmark::DoNotOptimize(bands.re.data());
  }
  state.SetItemsProcessed(state.iterations() * kBlock);
}
BENCHMARK(BM_AnalyzeReference);

void BM_Synthesize(benchmark::State& state) {
  const Filterbank fb(Spec());
  const std::vector<double> x = Noise(kBlock);
  FilterState fs;
  BandBlock bands;
  fb.Analyze(x, fs, bands);
  std::vector<double> out(kBlock);
  const ChannelVector target = Filled(6.0);
  for (auto _ : state) {
    fb.Synthesize(bands, target, fs, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * kBlock);
}
BENCHMARK(BM_Synthesize);

void BM_SynthesizeReference(benchmark::State& state) {
  const Filterbank fb(Spec());
  const std::vector<double> x = Noise(kBlock);
  FilterState fs;
  BandBlock bands;
  fb.Analyze(x, fs, bands);
  std::vector<double> out(kBlock);
  const ChannelVector target = Filled(6.0);
  for (auto _ : state) {
    reference::Synthesize(Spec(), bands, target, fs, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * kBlock);
}
BENCHMARK(BM_SynthesizeReference);

std::vector<PlattConfig> Variants() {
  std::vector<PlattConfig> variants;
  for (double k : {1.0, 2.0, 4.0, 8.0}) {
    PlattConfig c = PlattConfig::Default(Spec());
    c.expansion = k;
    variants.push_back(c);
  }
  return variants;
}

// Four compensations, each with its own engine.
void BM_SeparateEngines(benchmark::State& state) {
  const std::vector<double> x = Noise(48000);
  std::vector<Engine> engines;
  for (const PlattConfig& v : Variants()) {
    EngineConfig config = EngineConfig::Default();
    config.platt = v;
    engines.emplace_back(config);
  }
  std::vector<double> out(x.size());
  for (auto _ : state) {
    for (Engine& e : engines) e.Process(x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_SeparateEngines)->Unit(benchmark::kMillisecond);

// The same four compensations sharing one analysis.
void BM_EngineBank(benchmark::State& state) {
  const std::vector<double> x = Noise(48000);
  EngineBank bank(EngineConfig::Default(), Variants());
  std::vector<std::vector<double>> out(bank.size(), std::vector<double>(x.size()));
  std::vector<std::span<double>> spans(out.begin(), out.end());
  for (auto _ : state) {
    bank.Process(x, spans);
    benchmark::DoNotOptimize(out[0].data());
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_EngineBank)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace platt

BENCHMARK_MAIN();
