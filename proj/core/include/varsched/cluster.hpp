#pragma once

#include <optional>
#include <span>
#include <vector>

#include "varsched/types.hpp"

namespace varsched {

// GPUs of one job. `lv_product` is locality_factor * max_pm_score, where the
// score is whatever view (binned or raw) the placing policy used.
struct Allocation {
  JobId job_id = 0;
  std::vector<GpuId> gpu_ids;  // ascending
  bool spans_nodes = false;
  double max_pm_score = 0.0;
  double locality_factor = 1.0;
  double lv_product = 0.0;
};

// Homogeneous cluster: node n owns GPUs [n * gpus_per_node, (n + 1) * gpus_per_node).
class ClusterState {
 public:
  ClusterState(int nodes, int gpus_per_node);

  int nodes() const { return nodes_; }
  int gpus_per_node() const { return gpus_per_node_; }
  int size() const { return nodes_ * gpus_per_node_; }
  NodeId node_of(GpuId gpu) const { return gpu / gpus_per_node_; }

  bool in_use(GpuId gpu) const { return owner_.at(static_cast<std::size_t>(gpu)).has_value(); }
  std::optional<JobId> owner(GpuId gpu) const { return owner_.at(static_cast<std::size_t>(gpu)); }

  int free_count() const { return free_count_; }
  int used_count() const { return size() - free_count_; }
  int free_on_node(NodeId node) const;
  std::vector<GpuId> free_gpus() const;

  // Throws InvariantViolation if any GPU is already taken.
  void mark_in_use(std::span<const GpuId> gpus, JobId job);
  // Throws InvariantViolation if any GPU is not owned by `job`.
  void release(std::span<const GpuId> gpus, JobId job);

  bool spans_nodes(std::span<const GpuId> gpus) const;

 private:
  int nodes_;
  int gpus_per_node_;
  int free_count_;
  std::vector<std::optional<JobId>> owner_;
};

}  // namespace varsched
