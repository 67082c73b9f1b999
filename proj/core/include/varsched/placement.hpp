#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "varsched/cluster.hpp"
#include "varsched/job.hpp"
#include "varsched/variability.hpp"

namespace varsched::placement {

struct PlacementRequest {
  JobId job_id = 0;
  ClassIndex job_class = 0;
  int demand = 1;
};

enum class LocalityLevel { within, across };

struct LVEntry {
  LocalityLevel level = LocalityLevel::within;
  int bin = 0;
  double locality = 1.0;
  double pm_score = 0.0;
  double product = 0.0;  // locality * pm_score
};

// Locality x variability grid for one class. Row 0 is L_within (1.0), row 1
// is L_across; columns are the class's ascending PM-Score bins.
struct LVMatrix {
  double l_within = 1.0;
  double l_across = 1.0;
  std::vector<double> bin_scores;
  std::vector<LVEntry> traversal;  // ascending product; within first, then lower bin

  double entry(LocalityLevel level, std::size_t bin) const;
};

LVMatrix build_lv_matrix(std::span<const double> bin_scores, double l_across);

// One matrix per class, columns = every distinct score the class's GPUs carry
// (bin centroids and outlier scores alike).
std::vector<LVMatrix> build_lv_matrices(const variability::PMBinning& binning,
                                        std::span<const double> l_across_per_class);

// Placement priority: the longest queue prefix whose cumulative demand stays
// within the cluster is stably sorted by class (A first); the rest keeps its
// scheduling order.
std::vector<const Job*> reorder_for_placement(std::span<const Job* const> queue, int cluster_size);

// Index one past the guaranteed prefix used by reorder_for_placement.
std::size_t guaranteed_prefix(std::span<const Job* const> queue, int cluster_size);

// Greedy: the `demand` free GPUs with the lowest scores (ties by id).
std::optional<Allocation> pm_first(ClusterState& state, const PlacementRequest& request,
                                   const variability::PMBinning& binning, double l_across = 1.0);

// L x V traversal. Demands above one node's worth go through pm_first.
std::optional<Allocation> pal(ClusterState& state, const PlacementRequest& request, const LVMatrix& lv,
                              const variability::PMBinning& binning);

// Fewest nodes, then tightest fit (fewest free GPUs left on the chosen
// nodes), then lowest node ids. Ignores variability.
std::optional<Allocation> packed(ClusterState& state, const PlacementRequest& request,
                                 const variability::PMBinning& binning, double l_across = 1.0);

// Uniform random subset of the free list, reproducible per seed.
std::optional<Allocation> random_place(ClusterState& state, const PlacementRequest& request,
                                       std::uint64_t seed, const variability::PMBinning& binning,
                                       double l_across = 1.0);

enum class Stickiness { sticky, non_sticky };
enum class StickyDecision { keep, re_place };

// Sticky jobs keep GPUs while they stay running; everything else (non-sticky
// policies, jobs resuming from suspension) is placed afresh.
StickyDecision apply_stickiness(const Job& job, Stickiness mode);

enum class PlacementPolicy { packed_sticky, packed_nonsticky, random_sticky, random_nonsticky, pm_first, pal };

inline constexpr PlacementPolicy kAllPolicies[] = {
    PlacementPolicy::packed_sticky,    PlacementPolicy::packed_nonsticky, PlacementPolicy::random_sticky,
    PlacementPolicy::random_nonsticky, PlacementPolicy::pm_first,         PlacementPolicy::pal};

std::string_view to_string(PlacementPolicy policy);
PlacementPolicy parse_placement(std::string_view name);
Stickiness stickiness_of(PlacementPolicy policy);

// Builds the Allocation record (spanning, scores, LV-product) for a chosen
// GPU set without touching cluster state.
Allocation describe(const ClusterState& state, JobId job, std::vector<GpuId> gpus,
                    std::span<const double> scores, double l_across);

// Binds a policy to the score view and per-class locality penalties it uses.
class Placer {
 public:
  Placer(PlacementPolicy policy, variability::PMBinning view, std::vector<double> l_across_per_class,
         std::uint64_t seed);

  PlacementPolicy policy() const { return policy_; }
  Stickiness stickiness() const { return stickiness_of(policy_); }
  const variability::PMBinning& view() const { return view_; }
  const std::vector<LVMatrix>& lv_matrices() const { return lv_; }

  // `salt` decorrelates random placement across calls (e.g. round and job).
  std::optional<Allocation> place(ClusterState& state, const PlacementRequest& request,
                                  std::uint64_t salt) const;

 private:
  PlacementPolicy policy_;
  variability::PMBinning view_;
  std::vector<double> l_across_;
  std::vector<LVMatrix> lv_;
  std::uint64_t seed_;
};

}  // namespace varsched::placement
