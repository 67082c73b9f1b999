#include "varsched/placement.hpp"

#include <algorithm>
#include <iterator>
#include <limits>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "varsched/rng.hpp"

namespace varsched::placement {

using variability::PMBinning;

double LVMatrix::entry(LocalityLevel level, std::size_t bin) const {
  return (level == LocalityLevel::within ? l_within : l_across) * bin_scores.at(bin);
}

LVMatrix build_lv_matrix(std::span<const double> bin_scores, double l_across) {
  if (!(l_across >= 1.0)) throw std::invalid_argument("build_lv_matrix: L_across must be >= 1");
  LVMatrix lv;
  lv.l_across = l_across;
  lv.bin_scores.assign(bin_scores.begin(), bin_scores.end());
  for (const auto level : {LocalityLevel::within, LocalityLevel::across}) {
    const double l = level == LocalityLevel::within ? lv.l_within : lv.l_across;
    for (std::size_t b = 0; b < lv.bin_scores.size(); ++b) {
      lv.traversal.push_back(LVEntry{level, static_cast<int>(b), l, lv.bin_scores[b], l * lv.bin_scores[b]});
    }
  }
  std::stable_sort(lv.traversal.begin(), lv.traversal.end(), [](const LVEntry& a, const LVEntry& b) {
    if (a.product != b.product) return a.product < b.product;
    if (a.level != b.level) return a.level == LocalityLevel::within;
    return a.bin < b.bin;
  });
  return lv;
}

std::vector<LVMatrix> build_lv_matrices(const PMBinning& binning, std::span<const double> l_across_per_class) {
  if (l_across_per_class.size() != static_cast<std::size_t>(binning.num_classes())) {
    throw std::invalid_argument("build_lv_matrices: need one locality penalty per class");
  }
  std::vector<LVMatrix> out;
  for (int c = 0; c < binning.num_classes(); ++c) {
    out.push_back(build_lv_matrix(binning.at(c).distinct_scores(), l_across_per_class[static_cast<std::size_t>(c)]));
  }
  return out;
}

std::size_t guaranteed_prefix(std::span<const Job* const> queue, int cluster_size) {
  long long cumulative = 0;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    cumulative += queue[i]->spec.gpu_demand;
    if (cumulative > cluster_size) return i;
  }
  return queue.size();
}

std::vector<const Job*> reorder_for_placement(std::span<const Job* const> queue, int cluster_size) {
  std::vector<const Job*> out(queue.begin(), queue.end());
  const auto cut = guaranteed_prefix(queue, cluster_size);
  std::stable_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(cut),
                   [](const Job* a, const Job* b) { return a->spec.job_class < b->spec.job_class; });
  return out;
}

Allocation describe(const ClusterState& state, JobId job, std::vector<GpuId> gpus,
                    std::span<const double> scores, double l_across) {
  std::sort(gpus.begin(), gpus.end());
  Allocation a;
  a.job_id = job;
  a.spans_nodes = state.spans_nodes(gpus);
  for (auto g : gpus) a.max_pm_score = std::max(a.max_pm_score, scores[static_cast<std::size_t>(g)]);
  a.locality_factor = a.spans_nodes ? l_across : 1.0;
  a.lv_product = a.locality_factor * a.max_pm_score;
  a.gpu_ids = std::move(gpus);
  return a;
}

namespace {

void check_request(const ClusterState& state, const PlacementRequest& request, const PMBinning& binning) {
  if (request.demand < 1) throw std::invalid_argument("placement: demand must be at least 1");
  if (request.job_class < 0 || request.job_class >= binning.num_classes()) {
    throw std::invalid_argument(fmt::format("placement: unknown class {}", request.job_class));
  }
  if (binning.num_gpus() != static_cast<std::size_t>(state.size())) {
    throw std::invalid_argument("placement: score table does not match cluster size");
  }
}

Allocation commit(ClusterState& state, const PlacementRequest& request, std::vector<GpuId> gpus,
                  std::span<const double> scores, double l_across) {
  auto alloc = describe(state, request.job_id, std::move(gpus), scores, l_across);
  state.mark_in_use(alloc.gpu_ids, request.job_id);
  return alloc;
}

std::vector<GpuId> sorted_by_score(std::vector<GpuId> gpus, std::span<const double> scores) {
  std::stable_sort(gpus.begin(), gpus.end(), [&](GpuId a, GpuId b) {
    return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
  });
  return gpus;
}

// Best packed set among `candidates` (all on one node, ascending ids): the
// demand-sized combination with the smallest max score, first in
// lexicographic order on ties.
bool best_combination(std::span<const GpuId> candidates, int demand, std::span<const double> scores,
                      std::vector<GpuId>& best, double& best_max) {
  const auto n = candidates.size();
  const auto k = static_cast<std::size_t>(demand);
  if (n < k) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  bool found = false;
  while (true) {
    double m = 0.0;
    for (auto i : idx) m = std::max(m, scores[static_cast<std::size_t>(candidates[i])]);
    if (m < best_max) {
      best_max = m;
      best.clear();
      for (auto i : idx) best.push_back(candidates[i]);
      found = true;
    }
    // Advance to the next combination in lexicographic order.
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + (pos - 1)) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return found;
}

}  // namespace

std::optional<Allocation> pm_first(ClusterState& state, const PlacementRequest& request,
                                   const PMBinning& binning, double l_across) {
  check_request(state, request, binning);
  if (state.free_count() < request.demand) return std::nullopt;
  const auto scores = binning.scores(request.job_class);
  auto order = sorted_by_score(state.free_gpus(), scores);
  order.resize(static_cast<std::size_t>(request.demand));
  return commit(state, request, std::move(order), scores, l_across);
}

std::optional<Allocation> pal(ClusterState& state, const PlacementRequest& request, const LVMatrix& lv,
                              const PMBinning& binning) {
  check_request(state, request, binning);
  if (state.free_count() < request.demand) return std::nullopt;
  if (request.demand > state.gpus_per_node()) return pm_first(state, request, binning, lv.l_across);

  const auto scores = binning.scores(request.job_class);
  const auto free = state.free_gpus();
  std::vector<std::vector<GpuId>> free_by_node(static_cast<std::size_t>(state.nodes()));
  for (auto g : free) free_by_node[static_cast<std::size_t>(state.node_of(g))].push_back(g);
  const auto by_score = sorted_by_score(free, scores);

  std::vector<GpuId> candidates;
  for (const auto& entry : lv.traversal) {
    const double limit = entry.pm_score;
    if (entry.level == LocalityLevel::within) {
      std::vector<GpuId> best;
      double best_max = std::numeric_limits<double>::infinity();
      for (const auto& node_gpus : free_by_node) {
        candidates.clear();
        for (auto g : node_gpus) {
          if (scores[static_cast<std::size_t>(g)] <= limit) candidates.push_back(g);
        }
        best_combination(candidates, request.demand, scores, best, best_max);
      }
      if (!best.empty()) return commit(state, request, std::move(best), scores, lv.l_across);
    } else {
      candidates.clear();
      for (auto g : by_score) {
        if (scores[static_cast<std::size_t>(g)] > limit) break;
        candidates.push_back(g);
        if (candidates.size() == static_cast<std::size_t>(request.demand)) break;
      }
      if (candidates.size() == static_cast<std::size_t>(request.demand)) {
        return commit(state, request, std::move(candidates), scores, lv.l_across);
      }
    }
  }
  return std::nullopt;
}

std::optional<Allocation> packed(ClusterState& state, const PlacementRequest& request, const PMBinning& binning,
                                 double l_across) {
  check_request(state, request, binning);
  if (state.free_count() < request.demand) return std::nullopt;
  const int gpn = state.gpus_per_node();
  const int demand = request.demand;

  std::vector<std::vector<GpuId>> free_by_node(static_cast<std::size_t>(state.nodes()));
  for (auto g : state.free_gpus()) free_by_node[static_cast<std::size_t>(state.node_of(g))].push_back(g);

  // Single node, tightest fit.
  int best_node = -1;
  for (int n = 0; n < state.nodes(); ++n) {
    const int f = static_cast<int>(free_by_node[static_cast<std::size_t>(n)].size());
    if (f >= demand && (best_node < 0 || f < static_cast<int>(free_by_node[static_cast<std::size_t>(best_node)].size()))) {
      best_node = n;
    }
  }
  if (best_node >= 0) {
    auto& g = free_by_node[static_cast<std::size_t>(best_node)];
    std::vector<GpuId> pick(g.begin(), g.begin() + demand);
    return commit(state, request, std::move(pick), binning.scores(request.job_class), l_across);
  }

  // Minimum node count m: take the fullest nodes first.
  std::vector<int> counts;
  for (const auto& g : free_by_node) {
    if (!g.empty()) counts.push_back(static_cast<int>(g.size()));
  }
  std::sort(counts.rbegin(), counts.rend());
  int m = 0;
  for (int acc = 0; acc < demand; ++m) acc += counts[static_cast<std::size_t>(m)];

  // Among m-node selections minimise the total free GPUs on the chosen nodes.
  // Nodes with equal free counts are interchangeable, so search over how many
  // nodes of each free count to take (bounded knapsack, layered by count).
  std::vector<int> avail(static_cast<std::size_t>(gpn) + 1, 0);
  for (int c : counts) ++avail[static_cast<std::size_t>(c)];
  const int max_sum = m * gpn;
  const auto cell = [&](int j, int s) { return static_cast<std::size_t>(j) * static_cast<std::size_t>(max_sum + 1) + static_cast<std::size_t>(s); };
  std::vector<std::vector<char>> reach(static_cast<std::size_t>(gpn) + 1,
                                       std::vector<char>(static_cast<std::size_t>(m + 1) * static_cast<std::size_t>(max_sum + 1), 0));
  reach[0][cell(0, 0)] = 1;
  for (int v = 1; v <= gpn; ++v) {
    auto& cur = reach[static_cast<std::size_t>(v)];
    const auto& prev = reach[static_cast<std::size_t>(v - 1)];
    for (int j = 0; j <= m; ++j) {
      for (int s = 0; s <= max_sum; ++s) {
        if (!prev[cell(j, s)]) continue;
        for (int t = 0; t <= avail[static_cast<std::size_t>(v)] && j + t <= m && s + t * v <= max_sum; ++t) {
          cur[cell(j + t, s + t * v)] = 1;
        }
      }
    }
  }
  int best_sum = -1;
  for (int s = demand; s <= max_sum; ++s) {
    if (reach[static_cast<std::size_t>(gpn)][cell(m, s)]) {
      best_sum = s;
      break;
    }
  }
  if (best_sum < 0) throw InvariantViolation("packed: no feasible multi-node selection");

  // Reconstruct how many nodes of each free count to use, larger counts first.
  std::vector<int> take(static_cast<std::size_t>(gpn) + 1, 0);
  int j = m;
  int s = best_sum;
  for (int v = gpn; v >= 1; --v) {
    const auto& prev = reach[static_cast<std::size_t>(v - 1)];
    for (int t = std::min(avail[static_cast<std::size_t>(v)], j); t >= 0; --t) {
      if (s - t * v >= 0 && prev[cell(j - t, s - t * v)]) {
        take[static_cast<std::size_t>(v)] = t;
        j -= t;
        s -= t * v;
        break;
      }
    }
  }

  std::vector<int> chosen;
  for (int v = gpn; v >= 1; --v) {
    int need = take[static_cast<std::size_t>(v)];
    for (int n = 0; n < state.nodes() && need > 0; ++n) {
      if (static_cast<int>(free_by_node[static_cast<std::size_t>(n)].size()) == v) {
        chosen.push_back(n);
        --need;
      }
    }
  }
  std::vector<GpuId> pick;
  for (int n : chosen) {
    for (auto g : free_by_node[static_cast<std::size_t>(n)]) {
      if (static_cast<int>(pick.size()) == demand) break;
      pick.push_back(g);
    }
  }
  return commit(state, request, std::move(pick), binning.scores(request.job_class), l_across);
}

std::optional<Allocation> random_place(ClusterState& state, const PlacementRequest& request, std::uint64_t seed,
                                       const PMBinning& binning, double l_across) {
  check_request(state, request, binning);
  if (state.free_count() < request.demand) return std::nullopt;
  const auto free = state.free_gpus();
  std::vector<GpuId> pick;
  pick.reserve(static_cast<std::size_t>(request.demand));
  auto rng = make_rng(seed, 0x7a11d);
  std::sample(free.begin(), free.end(), std::back_inserter(pick), request.demand, rng);
  return commit(state, request, std::move(pick), binning.scores(request.job_class), l_across);
}

StickyDecision apply_stickiness(const Job& job, Stickiness mode) {
  if (mode == Stickiness::sticky && job.state == JobState::running && job.allocation) {
    return StickyDecision::keep;
  }
  return StickyDecision::re_place;
}

std::string_view to_string(PlacementPolicy policy) {
  switch (policy) {
    case PlacementPolicy::packed_sticky: return "packed-sticky";
    case PlacementPolicy::packed_nonsticky: return "packed-nonsticky";
    case PlacementPolicy::random_sticky: return "random-sticky";
    case PlacementPolicy::random_nonsticky: return "random-nonsticky";
    case PlacementPolicy::pm_first: return "pm-first";
    case PlacementPolicy::pal: return "pal";
  }
  return "unknown";
}

PlacementPolicy parse_placement(std::string_view name) {
  for (auto p : kAllPolicies) {
    if (to_string(p) == name) return p;
  }
  if (name == "tiresias") return PlacementPolicy::packed_sticky;
  if (name == "gandiva") return PlacementPolicy::packed_nonsticky;
  throw std::invalid_argument(fmt::format("unknown placement policy '{}'", name));
}

Stickiness stickiness_of(PlacementPolicy policy) {
  switch (policy) {
    case PlacementPolicy::packed_sticky:
    case PlacementPolicy::random_sticky:
      return Stickiness::sticky;
    default:
      return Stickiness::non_sticky;
  }
}

Placer::Placer(PlacementPolicy policy, PMBinning view, std::vector<double> l_across_per_class, std::uint64_t seed)
    : policy_(policy), view_(std::move(view)), l_across_(std::move(l_across_per_class)), seed_(seed) {
  if (l_across_.size() != static_cast<std::size_t>(view_.num_classes())) {
    throw std::invalid_argument("Placer: need one locality penalty per class");
  }
  lv_ = build_lv_matrices(view_, l_across_);
}

std::optional<Allocation> Placer::place(ClusterState& state, const PlacementRequest& request,
                                        std::uint64_t salt) const {
  if (request.job_class < 0 || request.job_class >= view_.num_classes()) {
    throw std::invalid_argument(fmt::format("placement: unknown class {}", request.job_class));
  }
  const double l_across = l_across_[static_cast<std::size_t>(request.job_class)];
  switch (policy_) {
    case PlacementPolicy::packed_sticky:
    case PlacementPolicy::packed_nonsticky:
      return packed(state, request, view_, l_across);
    case PlacementPolicy::random_sticky:
    case PlacementPolicy::random_nonsticky:
      return random_place(state, request, seed_ ^ (salt * 0x9e3779b97f4a7c15ULL), view_, l_across);
    case PlacementPolicy::pm_first:
      return pm_first(state, request, view_, l_across);
    case PlacementPolicy::pal:
      return pal(state, request, lv_[static_cast<std::size_t>(request.job_class)], view_);
  }
  throw std::logic_error("unhandled placement policy");
}

}  // namespace varsched::placement
