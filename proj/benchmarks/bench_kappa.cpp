#include <benchmark/benchmark.h>

#include <algorithm>
#include <functional>
#include <vector>

#include "kappa/distributions.hpp"
#include "kappa/estimators.hpp"
#include "kappa/montecarlo.hpp"

namespace {

const kappa::DistributionSpec kPareto = kappa::ParetoParams{1.1, 1.0};

void BM_FillPareto(benchmark::State& state) {
  std::vector<double> buf(static_cast<std::size_t>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    kappa::fill_sample(kPareto, ++seed, buf);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FillPareto)->Range(1 << 10, 1 << 20);

void BM_FillMixture(benchmark::State& state) {
  const kappa::DistributionSpec mix = kappa::MixtureSpec::unit_mean({0.5, 0.5}, std::vector{1.2, 1.8});
  std::vector<double> buf(static_cast<std::size_t>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    kappa::fill_sample(mix, ++seed, buf);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FillMixture)->Range(1 << 10, 1 << 20);

void BM_TopShareSelect(benchmark::State& state) {
  std::vector<double> base(static_cast<std::size_t>(state.range(0)));
  kappa::fill_sample(kPareto, 1, base);
  std::vector<double> scratch(base.size());
  for (auto _ : state) {
    std::copy(base.begin(), base.end(), scratch.begin());
    benchmark::DoNotOptimize(kappa::top_share_inplace(scratch, 0.01).value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TopShareSelect)->Range(1 << 10, 1 << 20);

// Baseline: full descending sort of the same buffer.
void BM_TopShareFullSort(benchmark::State& state) {
  std::vector<double> base(static_cast<std::size_t>(state.range(0)));
  kappa::fill_sample(kPareto, 1, base);
  std::vector<double> scratch(base.size());
  const std::size_t k = kappa::top_count(base.size(), 0.01);
  for (auto _ : state) {
    std::copy(base.begin(), base.end(), scratch.begin());
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    double top = 0.0, total = 0.0;
    for (std::size_t i = 0; i < scratch.size(); ++i) {
      total += scratch[i];
      if (i < k) top += scratch[i];
    }
    benchmark::DoNotOptimize(top / total);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TopShareFullSort)->Range(1 << 10, 1 << 20);

void BM_McKappaBias(benchmark::State& state) {
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kappa::mc_kappa_bias(kPareto, 0.01, 1000, 1000, 7, {threads}).mean);
  }
  state.SetItemsProcessed(state.iterations() * 1000 * 1000);
}
BENCHMARK(BM_McKappaBias)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
