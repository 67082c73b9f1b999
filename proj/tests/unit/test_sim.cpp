#include <gtest/gtest.h>

#include <cmath>

#include "support/fixtures.hpp"
#include "varsched/sim.hpp"
#include "varsched/trace.hpp"

using namespace varsched;
using namespace varsched::sim;
using fixtures::job;

namespace {

variability::VariabilityProfile flat_profile(std::size_t gpus, int classes = 3) {
  return variability::VariabilityProfile(std::vector<std::vector<double>>(static_cast<std::size_t>(classes),
                                                                          std::vector<double>(gpus, 1.0)));
}

SimConfig small_config(int nodes, int gpn) {
  SimConfig c;
  c.nodes = nodes;
  c.gpus_per_node = gpn;
  return c;
}

const JobRecord& record_of(const SimResult& r, JobId id) {
  for (const auto& j : r.jobs) {
    if (j.id == id) return j;
  }
  throw std::out_of_range("no such job");
}

}  // namespace

TEST(EffectiveIterTime, SlowestGpuSetsThePace) {
  const auto s = job(0, 0, 2, 0, 10, 2.0);
  const std::vector<double> values = {0.94, 1.06, 1.0, 1.0};
  const std::vector<GpuId> packed = {0, 1};
  EXPECT_NEAR(effective_iter_time(s, packed, false, values, 1.5), 2.12, 1e-12);
}

TEST(EffectiveIterTime, CrossNodeMultipliesByLocality) {
  const auto s = job(0, 0, 2, 0, 10, 2.0);
  const std::vector<double> values = {0.94, 1.06, 1.0, 1.0};
  const std::vector<GpuId> spread = {1, 2};
  EXPECT_NEAR(effective_iter_time(s, spread, true, values, 1.5), 3.18, 1e-12);
}

TEST(EffectiveIterTime, MedianGpusPackedKeepBaseTime) {
  const auto s = job(0, 0, 2, 0, 10, 2.0);
  const std::vector<double> values = {1.0, 1.0, 0.9, 0.9};
  const std::vector<GpuId> packed = {0, 1};
  EXPECT_DOUBLE_EQ(effective_iter_time(s, packed, false, values, 3.0), 2.0);
}

TEST(Simulator, SingleJobFinishesMidRound) {
  const auto r = run_sim(std::vector{job(0, 0, 1, 0, 100, 7.0)}, flat_profile(2), small_config(1, 2));
  ASSERT_EQ(r.jobs.size(), 1u);
  EXPECT_DOUBLE_EQ(r.jobs[0].jct, 700.0);
  EXPECT_DOUBLE_EQ(r.jobs[0].wait, 0.0);
  EXPECT_EQ(r.rounds.size(), 3u);
  EXPECT_DOUBLE_EQ(r.makespan, 700.0);
}

TEST(Simulator, FullClusterJobsRunOneAfterAnother) {
  const auto r = run_sim(std::vector{job(0, 0, 2, 0, 100, 6.0), job(1, 0, 2, 0, 100, 6.0)}, flat_profile(2),
                         small_config(1, 2));
  EXPECT_DOUBLE_EQ(record_of(r, 0).jct, 600.0);
  EXPECT_DOUBLE_EQ(record_of(r, 1).start, 600.0);
  EXPECT_DOUBLE_EQ(record_of(r, 1).jct, 1200.0);
}

TEST(Simulator, LargeJobWaitsWhileSmallJobsBackfill) {
  std::vector<JobSpec> trace = {job(0, 0, 20, 0, 1000, 3.0), job(1, 10, 48, 0, 10, 1.0)};
  for (int i = 0; i < 4; ++i) trace.push_back(job(2 + i, 20 + i, 4, 0, 10, 1.0));
  auto c = small_config(16, 4);
  c.l_across = 1.0;  // the 20-GPU job spans nodes; keep its runtime at 3000 s
  const auto r = run_sim(trace, flat_profile(64), c);
  EXPECT_DOUBLE_EQ(record_of(r, 1).start, 3000.0);
  EXPECT_DOUBLE_EQ(record_of(r, 1).wait, 2990.0);
  for (JobId id = 2; id < 6; ++id) EXPECT_DOUBLE_EQ(record_of(r, id).start, 300.0);
}

TEST(Simulator, EmptyTraceProducesNothing) {
  const auto r = run_sim(std::vector<JobSpec>{}, flat_profile(4), small_config(1, 4));
  EXPECT_TRUE(r.jobs.empty());
  EXPECT_TRUE(r.rounds.empty());
  EXPECT_DOUBLE_EQ(r.makespan, 0.0);
}

TEST(Simulator, ArrivalsAfterIdleGapWaitForNextRound) {
  const auto r = run_sim(std::vector{job(0, 1000, 1, 0, 10, 1.0)}, flat_profile(1), small_config(1, 1));
  EXPECT_DOUBLE_EQ(record_of(r, 0).start, 1200.0);
  EXPECT_DOUBLE_EQ(record_of(r, 0).wait, 200.0);
}

TEST(Simulator, DeterministicForFixedSeed) {
  const auto trace = trace::synthesize_trace(trace::sia_like_spec(4));
  const auto profile = variability::synthesize_profile(variability::heavy_tail_profile_spec(256, 4));
  for (auto policy : placement::kAllPolicies) {
    SimConfig c;
    c.placement = policy;
    c.seed = 4;
    const auto a = run_sim(trace, profile, c);
    const auto b = run_sim(trace, profile, c);
    ASSERT_EQ(a.jobs.size(), b.jobs.size());
    for (std::size_t i = 0; i < a.jobs.size(); ++i) {
      EXPECT_EQ(a.jobs[i].finish, b.jobs[i].finish);
      EXPECT_EQ(a.jobs[i].migrations, b.jobs[i].migrations);
    }
    EXPECT_EQ(a.makespan, b.makespan);
  }
}

TEST(Simulator, ConservesGpusEveryRound) {
  const auto trace = trace::synthesize_trace(trace::sia_like_spec(6));
  const auto profile = fit_profile(variability::synthesize_profile(variability::heavy_tail_profile_spec(256, 6)),
                                   SimConfig{});
  for (auto sched : {scheduler::SchedulerKind::fifo, scheduler::SchedulerKind::las, scheduler::SchedulerKind::srtf}) {
    for (auto policy : placement::kAllPolicies) {
      SimConfig c;
      c.scheduler = sched;
      c.placement = policy;
      Simulator sim(trace, profile, c);
      while (!sim.done()) {
        const auto rec = sim.run_round();
        ASSERT_LE(rec.gpus_in_use, c.cluster_size());
        int held = 0;
        for (const auto& j : sim.jobs()) {
          if (j.allocation) held += j.spec.gpu_demand;
        }
        ASSERT_EQ(held, sim.cluster().used_count());
      }
      EXPECT_EQ(sim.result().jobs.size(), trace.size());
    }
  }
}

TEST(Simulator, StickyPoliciesMoveOnlyAfterPreemption) {
  const auto trace = trace::synthesize_trace(trace::sia_like_spec(2));
  const auto profile = variability::synthesize_profile(variability::heavy_tail_profile_spec(64, 2));
  for (auto policy : {placement::PlacementPolicy::packed_sticky, placement::PlacementPolicy::random_sticky}) {
    SimConfig c;
    c.placement = policy;
    for (const auto& j : run_sim(trace, profile, c).jobs) EXPECT_LE(j.migrations, j.preemptions) << j.id;
  }
}

TEST(Simulator, LasPreemptsJobsPastTheThreshold) {
  SimConfig c = small_config(1, 2);
  c.scheduler = scheduler::SchedulerKind::las;
  const auto r = run_sim(std::vector{job(0, 0, 2, 0, 1000, 6.0), job(1, 100, 2, 0, 100, 6.0)}, flat_profile(2), c);
  EXPECT_GE(record_of(r, 0).preemptions, 1);
  // Job 0 crosses 3200 GPU-seconds after six rounds; job 1 then takes over.
  EXPECT_DOUBLE_EQ(record_of(r, 1).start, 1800.0);
  EXPECT_DOUBLE_EQ(record_of(r, 1).finish, 2400.0);
}

TEST(Simulator, RejectsImpossibleInputs) {
  EXPECT_THROW(run_sim(std::vector{job(0, 0, 5)}, flat_profile(4), small_config(1, 4)), std::invalid_argument);
  EXPECT_THROW(run_sim(std::vector{job(0, 0, 1, 3)}, flat_profile(4), small_config(1, 4)), std::invalid_argument);
  EXPECT_THROW(run_sim(std::vector{job(0, 0, 1)}, flat_profile(2), small_config(1, 4)), std::invalid_argument);
  SimConfig bad = small_config(1, 4);
  bad.l_across = 0.5;
  EXPECT_THROW(run_sim(std::vector{job(0, 0, 1)}, flat_profile(4), bad), std::invalid_argument);
  EXPECT_THROW(Simulator({}, flat_profile(3), small_config(1, 4)), std::invalid_argument);
}

TEST(Simulator, FitProfileSamplesDown) {
  const auto big = variability::synthesize_profile(variability::heavy_tail_profile_spec(256, 1));
  const auto fitted = fit_profile(big, small_config(4, 4));
  EXPECT_EQ(fitted.num_gpus(), 16u);
  EXPECT_EQ(fitted, fit_profile(big, small_config(4, 4)));
  EXPECT_EQ(fit_profile(fitted, small_config(4, 4)), fitted);
}

TEST(Simulator, ProgressNeverGoesBackwards) {
  const auto trace = trace::synthesize_trace(trace::sia_like_spec(9));
  const auto profile = fit_profile(variability::synthesize_profile(variability::heavy_tail_profile_spec(256, 9)),
                                   SimConfig{});
  SimConfig c;
  c.scheduler = scheduler::SchedulerKind::las;
  Simulator sim(trace, profile, c);
  std::vector<double> last(trace.size(), 0.0);
  while (!sim.done()) {
    sim.run_round();
    for (std::size_t i = 0; i < sim.jobs().size(); ++i) {
      const auto& j = sim.jobs()[i];
      ASSERT_GE(j.completed_iterations, last[i]);
      ASSERT_LE(j.completed_iterations, static_cast<double>(j.spec.total_iterations));
      last[i] = j.completed_iterations;
    }
  }
  for (const auto& j : sim.result().jobs) {
    EXPECT_GE(j.wait, 0.0);
    EXPECT_GE(j.jct, j.wait);
    EXPECT_GT(j.jct, 0.0);
  }
}

TEST(Simulator, ThrottledGpuSlowsTheJob) {
  const variability::VariabilityProfile profile({{2.5, 2.5}, {1.0, 1.0}, {1.0, 1.0}});
  SimConfig c = small_config(1, 2);
  c.score_mode = ScoreMode::raw;
  const auto r = run_sim(std::vector{job(0, 0, 1, 0, 100, 1.0)}, profile, c);
  EXPECT_DOUBLE_EQ(record_of(r, 0).jct, 250.0);
}

TEST(ScoreMode, NamesRoundTrip) {
  EXPECT_EQ(parse_score_mode("raw"), ScoreMode::raw);
  EXPECT_EQ(to_string(ScoreMode::binned), "binned");
  EXPECT_THROW(parse_score_mode("fuzzy"), std::invalid_argument);
}
