#include "varsched/cluster.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "varsched/job.hpp"

namespace varsched {

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::pending: return "pending";
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::suspended: return "suspended";
    case JobState::finished: return "finished";
  }
  return "unknown";
}

ClusterState::ClusterState(int nodes, int gpus_per_node)
    : nodes_(nodes), gpus_per_node_(gpus_per_node), free_count_(nodes * gpus_per_node) {
  if (nodes < 1 || gpus_per_node < 1) {
    throw std::invalid_argument("ClusterState: nodes and gpus_per_node must be positive");
  }
  owner_.resize(static_cast<std::size_t>(size()));
}

int ClusterState::free_on_node(NodeId node) const {
  int count = 0;
  for (int g = node * gpus_per_node_; g < (node + 1) * gpus_per_node_; ++g) {
    if (!owner_[static_cast<std::size_t>(g)]) ++count;
  }
  return count;
}

std::vector<GpuId> ClusterState::free_gpus() const {
  std::vector<GpuId> out;
  out.reserve(static_cast<std::size_t>(free_count_));
  for (int g = 0; g < size(); ++g) {
    if (!owner_[static_cast<std::size_t>(g)]) out.push_back(g);
  }
  return out;
}

void ClusterState::mark_in_use(std::span<const GpuId> gpus, JobId job) {
  for (auto g : gpus) {
    if (g < 0 || g >= size()) throw InvariantViolation(fmt::format("gpu {} out of range", g));
    if (owner_[static_cast<std::size_t>(g)]) {
      throw InvariantViolation(fmt::format("gpu {} already allocated to job {} (requested by job {})", g,
                                           *owner_[static_cast<std::size_t>(g)], job));
    }
  }
  for (auto g : gpus) owner_[static_cast<std::size_t>(g)] = job;
  free_count_ -= static_cast<int>(gpus.size());
}

void ClusterState::release(std::span<const GpuId> gpus, JobId job) {
  for (auto g : gpus) {
    if (g < 0 || g >= size() || owner_[static_cast<std::size_t>(g)] != job) {
      throw InvariantViolation(fmt::format("job {} releasing gpu {} it does not hold", job, g));
    }
  }
  for (auto g : gpus) owner_[static_cast<std::size_t>(g)].reset();
  free_count_ += static_cast<int>(gpus.size());
}

bool ClusterState::spans_nodes(std::span<const GpuId> gpus) const {
  if (gpus.empty()) return false;
  const auto first = node_of(gpus.front());
  for (auto g : gpus) {
    if (node_of(g) != first) return true;
  }
  return false;
}

}  // namespace varsched
