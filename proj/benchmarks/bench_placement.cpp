#include <benchmark/benchmark.h>

#include <random>

#include "varsched/numeric.hpp"
#include "varsched/placement.hpp"
#include "varsched/variability.hpp"

using namespace varsched;

namespace {

// 256-GPU cluster (64 nodes x 4) with roughly half the GPUs taken.
struct Fixture {
  ClusterState state{64, 4};
  variability::PMBinning binning;
  placement::LVMatrix lv;

  Fixture() {
    const auto profile = variability::synthesize_profile(variability::heavy_tail_profile_spec(256, 1));
    binning = variability::bin_pm_scores(profile, 1);
    lv = placement::build_lv_matrix(binning.at(0).distinct_scores(), 1.5);
    std::mt19937_64 rng(5);
    std::bernoulli_distribution busy(0.5);
    std::vector<GpuId> taken;
    for (GpuId g = 0; g < 256; ++g) {
      if (busy(rng)) taken.push_back(g);
    }
    state.mark_in_use(taken, 999);
  }
};

void BM_Pal(benchmark::State& st) {
  const Fixture f;
  const placement::PlacementRequest req{1, 0, static_cast<int>(st.range(0))};
  for (auto _ : st) {
    auto state = f.state;
    benchmark::DoNotOptimize(placement::pal(state, req, f.lv, f.binning));
  }
}
BENCHMARK(BM_Pal)->Arg(1)->Arg(2)->Arg(4)->Arg(16);

void BM_PmFirst(benchmark::State& st) {
  const Fixture f;
  const placement::PlacementRequest req{1, 0, static_cast<int>(st.range(0))};
  for (auto _ : st) {
    auto state = f.state;
    benchmark::DoNotOptimize(placement::pm_first(state, req, f.binning, 1.5));
  }
}
BENCHMARK(BM_PmFirst)->Arg(1)->Arg(4)->Arg(16);

void BM_BinProfile(benchmark::State& st) {
  const auto profile =
      variability::synthesize_profile(variability::heavy_tail_profile_spec(static_cast<std::size_t>(st.range(0)), 2));
  for (auto _ : st) benchmark::DoNotOptimize(variability::bin_pm_scores(profile, 2));
}
BENCHMARK(BM_BinProfile)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
