#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"
#include "varsched/placement.hpp"

using namespace varsched;
using namespace varsched::placement;
using variability::PMBinning;

namespace {

PMBinning one_class(std::vector<double> scores) { return PMBinning::from_scores({std::move(scores)}); }

}  // namespace

TEST(LVMatrix, FourBinTraversalAndProducts) {
  const std::vector<double> bins = {0.89, 0.94, 1.06, 2.55};
  const auto lv = build_lv_matrix(bins, 1.5);
  ASSERT_EQ(lv.traversal.size(), 8u);
  const std::vector<std::pair<double, double>> expected = {{1.0, 0.89}, {1.0, 0.94}, {1.0, 1.06}, {1.5, 0.89},
                                                           {1.5, 0.94}, {1.5, 1.06}, {1.0, 2.55}, {1.5, 2.55}};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(lv.traversal[i].locality, expected[i].first) << i;
    EXPECT_EQ(lv.traversal[i].pm_score, expected[i].second) << i;
  }
  EXPECT_DOUBLE_EQ(lv.traversal[3].product, 1.335);
  EXPECT_DOUBLE_EQ(lv.traversal[4].product, 1.41);
  EXPECT_DOUBLE_EQ(lv.traversal[5].product, 1.59);
  EXPECT_DOUBLE_EQ(lv.traversal[7].product, 3.825);
  EXPECT_DOUBLE_EQ(lv.entry(LocalityLevel::across, 3), 3.825);
}

TEST(LVMatrix, EqualProductsPreferWithinNode) {
  const std::vector<double> bins = {1.0, 1.5};
  const auto lv = build_lv_matrix(bins, 1.5);
  EXPECT_EQ(lv.traversal[1].level, LocalityLevel::within);
  EXPECT_EQ(lv.traversal[1].pm_score, 1.5);
  EXPECT_EQ(lv.traversal[2].level, LocalityLevel::across);
}

TEST(LVMatrix, RejectsPenaltyBelowOne) {
  const std::vector<double> bins = {1.0};
  EXPECT_THROW(build_lv_matrix(bins, 0.9), std::invalid_argument);
}

TEST(LVMatrix, ColumnsIncludeOutlierScores) {
  const auto b = variability::bin_pm_scores(variability::VariabilityProfile({fixtures::four_bin_profile()}), 0);
  const std::vector<double> l = {1.5};
  const auto lvs = build_lv_matrices(b, l);
  ASSERT_EQ(lvs.size(), 1u);
  EXPECT_EQ(lvs[0].bin_scores.size(), 4u);
  EXPECT_DOUBLE_EQ(lvs[0].bin_scores.back(), 2.55);
}

TEST(ClusterState, DoubleAllocationIsInvariantViolation) {
  ClusterState s(2, 2);
  const std::vector<GpuId> a = {0, 1};
  s.mark_in_use(a, 1);
  EXPECT_EQ(s.free_count(), 2);
  EXPECT_THROW(s.mark_in_use(std::vector<GpuId>{1, 2}, 2), InvariantViolation);
  EXPECT_THROW(s.release(a, 2), InvariantViolation);
  s.release(a, 1);
  EXPECT_EQ(s.free_count(), 4);
  EXPECT_TRUE(s.spans_nodes(std::vector<GpuId>{1, 2}));
  EXPECT_FALSE(s.spans_nodes(std::vector<GpuId>{2, 3}));
}

TEST(PmFirst, LowestScoresTiesById) {
  ClusterState s(2, 2);
  const auto b = one_class({1.2, 0.9, 0.9, 1.0});
  const auto a = pm_first(s, {7, 0, 2}, b);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->gpu_ids, (std::vector<GpuId>{1, 2}));
  EXPECT_TRUE(a->spans_nodes);
  EXPECT_DOUBLE_EQ(a->max_pm_score, 0.9);
  EXPECT_EQ(s.owner(1), 7);
}

TEST(PmFirst, NotEnoughFreeGpus) {
  ClusterState s(1, 2);
  const auto b = one_class({1.0, 1.0});
  EXPECT_FALSE(pm_first(s, {1, 0, 3}, b));
  EXPECT_EQ(s.free_count(), 2);
}

TEST(PmFirst, BadRequests) {
  ClusterState s(1, 2);
  const auto b = one_class({1.0, 1.0});
  EXPECT_THROW(pm_first(s, {1, 0, 0}, b), std::invalid_argument);
  EXPECT_THROW(pm_first(s, {1, 4, 1}, b), std::invalid_argument);
  const auto wrong = one_class({1.0, 1.0, 1.0});
  EXPECT_THROW(pm_first(s, {1, 0, 1}, wrong), std::invalid_argument);
}

TEST(Pal, PrefersPackedWhenLocalityCostsMore) {
  // Node 0 holds two 1.06 GPUs; the two best GPUs are split across nodes.
  ClusterState s(2, 2);
  const auto b = one_class({1.06, 1.06, 0.89, 1.3});
  const auto lv = build_lv_matrix(b.at(0).distinct_scores(), 1.5);
  const auto a = pal(s, {1, 0, 2}, lv, b);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->gpu_ids, (std::vector<GpuId>{0, 1}));
  EXPECT_DOUBLE_EQ(a->lv_product, 1.06);
}

TEST(Pal, CrossesNodesWhenCheaper) {
  ClusterState s(2, 2);
  const auto b = one_class({0.9, 2.55, 0.9, 2.55});
  const auto lv = build_lv_matrix(b.at(0).distinct_scores(), 1.5);
  const auto a = pal(s, {1, 0, 2}, lv, b);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->gpu_ids, (std::vector<GpuId>{0, 2}));
  EXPECT_TRUE(a->spans_nodes);
  EXPECT_DOUBLE_EQ(a->lv_product, 1.35);
}

TEST(Pal, DegeneratesToPmFirstWithoutLocalityPenalty) {
  ClusterState s1(2, 2), s2(2, 2);
  const auto b = one_class({1.06, 1.06, 0.89, 1.3});
  const auto lv = build_lv_matrix(b.at(0).distinct_scores(), 1.0);
  const auto a = pal(s1, {1, 0, 2}, lv, b);
  const auto p = pm_first(s2, {1, 0, 2}, b, 1.0);
  ASSERT_TRUE(a && p);
  EXPECT_DOUBLE_EQ(a->lv_product, p->lv_product);
}

TEST(Pal, LargeDemandDelegatesToPmFirst) {
  ClusterState s(3, 2);
  const auto b = one_class({1.0, 2.0, 0.8, 0.9, 1.5, 0.7});
  const auto lv = build_lv_matrix(b.at(0).distinct_scores(), 1.5);
  const auto a = pal(s, {1, 0, 3}, lv, b);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->gpu_ids, (std::vector<GpuId>{2, 3, 5}));
  EXPECT_DOUBLE_EQ(a->lv_product, 1.5 * 0.9);
}

TEST(Pal, MatchesExhaustiveMinimumOnRandomInstances) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = fixtures::random_instance(rng);
    if (inst.state.free_count() < inst.demand) continue;
    for (double l : {1.0, 1.5, 3.0}) {
      auto state = inst.state;
      const auto b = one_class(inst.scores);
      const auto lv = build_lv_matrix(b.at(0).distinct_scores(), l);
      const auto a = pal(state, {1, 0, inst.demand}, lv, b);
      ASSERT_TRUE(a);
      EXPECT_EQ(a->lv_product, fixtures::exhaustive_min_lv(inst.state, inst.demand, inst.scores, l)) << trial;
      ++checked;
    }
  }
  EXPECT_GT(checked, 300);
}

TEST(Packed, SingleNodeTightestFit) {
  ClusterState s(3, 4);
  s.mark_in_use(std::vector<GpuId>{0}, 90);
  s.mark_in_use(std::vector<GpuId>{4, 5}, 91);
  const auto b = one_class(std::vector<double>(12, 1.0));
  const auto a = packed(s, {1, 0, 2}, b);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->gpu_ids, (std::vector<GpuId>{6, 7}));
  EXPECT_FALSE(a->spans_nodes);
}

TEST(Packed, MultiNodeUsesFewestNodes) {
  ClusterState s(4, 4);
  s.mark_in_use(std::vector<GpuId>{0, 1, 2}, 90);  // node 0: 1 free
  s.mark_in_use(std::vector<GpuId>{4}, 91);        // node 1: 3 free
  s.mark_in_use(std::vector<GpuId>{8, 9}, 92);     // node 2: 2 free
  const auto b = one_class(std::vector<double>(16, 1.0));
  const auto a = packed(s, {1, 0, 6}, b);
  ASSERT_TRUE(a);
  // Two nodes suffice: node 3 (4 free) plus the tightest partner, node 2.
  EXPECT_EQ(a->gpu_ids, (std::vector<GpuId>{10, 11, 12, 13, 14, 15}));
}

TEST(Packed, IgnoresScores) {
  ClusterState s(2, 2);
  const auto b = one_class({3.0, 3.0, 0.9, 0.9});
  const auto a = packed(s, {1, 0, 2}, b);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->gpu_ids, (std::vector<GpuId>{0, 1}));
  EXPECT_DOUBLE_EQ(a->max_pm_score, 3.0);
}

TEST(RandomPlace, ReproduciblePerSeedAndValid) {
  const auto b = one_class(std::vector<double>(16, 1.0));
  ClusterState s1(4, 4), s2(4, 4);
  const auto a1 = random_place(s1, {1, 0, 5}, 77, b);
  const auto a2 = random_place(s2, {1, 0, 5}, 77, b);
  ASSERT_TRUE(a1 && a2);
  EXPECT_EQ(a1->gpu_ids, a2->gpu_ids);
  EXPECT_EQ(a1->gpu_ids.size(), 5u);
  EXPECT_TRUE(std::is_sorted(a1->gpu_ids.begin(), a1->gpu_ids.end()));
  EXPECT_EQ(s1.free_count(), 11);
}

TEST(ReorderForPlacement, SortsGuaranteedPrefixByClass) {
  std::vector<Job> jobs = {Job(fixtures::job(0, 0, 4, 2)), Job(fixtures::job(1, 1, 2, 0)),
                           Job(fixtures::job(2, 2, 2, 1)), Job(fixtures::job(3, 3, 4, 0)),
                           Job(fixtures::job(4, 4, 1, 0))};
  std::vector<const Job*> q;
  for (const auto& j : jobs) q.push_back(&j);
  EXPECT_EQ(guaranteed_prefix(q, 8), 3u);
  const auto r = reorder_for_placement(q, 8);
  std::vector<JobId> ids;
  for (const auto* j : r) ids.push_back(j->spec.id);
  EXPECT_EQ(ids, (std::vector<JobId>{1, 2, 0, 3, 4}));
}

TEST(ReorderForPlacement, EmptyQueue) {
  std::vector<const Job*> q;
  EXPECT_TRUE(reorder_for_placement(q, 8).empty());
  EXPECT_EQ(guaranteed_prefix(q, 8), 0u);
}

TEST(Stickiness, RunningJobsKeepGpusOnlyWhenSticky) {
  Job j(fixtures::job(0, 0, 1));
  j.state = JobState::running;
  j.allocation = Allocation{0, {0}, false, 1.0, 1.0, 1.0};
  EXPECT_EQ(apply_stickiness(j, Stickiness::sticky), StickyDecision::keep);
  EXPECT_EQ(apply_stickiness(j, Stickiness::non_sticky), StickyDecision::re_place);
  j.state = JobState::suspended;
  j.allocation.reset();
  EXPECT_EQ(apply_stickiness(j, Stickiness::sticky), StickyDecision::re_place);
}

TEST(PolicyNames, RoundTripAndAliases) {
  for (auto p : kAllPolicies) EXPECT_EQ(parse_placement(to_string(p)), p);
  EXPECT_EQ(parse_placement("tiresias"), PlacementPolicy::packed_sticky);
  EXPECT_EQ(parse_placement("gandiva"), PlacementPolicy::packed_nonsticky);
  EXPECT_THROW(parse_placement("best"), std::invalid_argument);
  EXPECT_EQ(stickiness_of(PlacementPolicy::pal), Stickiness::non_sticky);
  EXPECT_EQ(stickiness_of(PlacementPolicy::pm_first), Stickiness::non_sticky);
  EXPECT_EQ(stickiness_of(PlacementPolicy::random_sticky), Stickiness::sticky);
}

TEST(Placer, DispatchesAndUsesPerClassPenalty) {
  const auto b = PMBinning::from_scores({{0.9, 2.55, 0.9, 2.55}, {1.0, 1.0, 1.0, 1.0}});
  Placer placer(PlacementPolicy::pal, b, {3.0, 1.2}, 0);
  ClusterState s(2, 2);
  const auto a = placer.place(s, {1, 0, 2}, 0);
  ASSERT_TRUE(a);
  // Spanning costs 3.0 * 0.9 = 2.7, more than packing onto a 2.55 GPU.
  EXPECT_EQ(a->gpu_ids, (std::vector<GpuId>{0, 1}));
  EXPECT_DOUBLE_EQ(a->lv_product, 2.55);
  EXPECT_THROW(Placer(PlacementPolicy::pal, b, {1.0}, 0), std::invalid_argument);
}
