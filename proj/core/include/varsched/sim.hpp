#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "varsched/cluster.hpp"
#include "varsched/job.hpp"
#include "varsched/placement.hpp"
#include "varsched/scheduler.hpp"
#include "varsched/variability.hpp"

namespace varsched::sim {

using variability::VariabilityProfile;

// What the placement policies see. The engine always charges raw penalties.
enum class ScoreMode { binned, raw };

std::string_view to_string(ScoreMode mode);
ScoreMode parse_score_mode(std::string_view name);

struct SimConfig {
  int nodes = 16;
  int gpus_per_node = 4;
  double round_duration = 300.0;
  double l_across = 1.5;
  // Per-class override of l_across; classes left unset (or past the end)
  // use l_across.
  std::vector<std::optional<double>> l_across_per_class;
  scheduler::SchedulerKind scheduler = scheduler::SchedulerKind::fifo;
  placement::PlacementPolicy placement = placement::PlacementPolicy::pal;
  std::uint64_t seed = 0;
  ScoreMode score_mode = ScoreMode::binned;
  double las_threshold = scheduler::kDefaultLasThreshold;

  int cluster_size() const { return nodes * gpus_per_node; }
  double l_across_for(ClassIndex cls) const;
  // Throws std::invalid_argument.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct JobRecord {
  JobId id = 0;
  int gpu_demand = 1;
  ClassIndex job_class = 0;
  double arrival = 0.0;
  double start = 0.0;
  double finish = 0.0;
  double jct = 0.0;
  double wait = 0.0;
  int migrations = 0;
  int preemptions = 0;
};

struct RoundRecord {
  std::int64_t index = 0;
  double time = 0.0;
  int gpus_in_use = 0;
  int running_jobs = 0;
  int queued_jobs = 0;
  int placed_jobs = 0;  // placement calls made this round
  double placement_seconds = 0.0;  // wall clock, not deterministic
};

struct SimResult {
  int cluster_size = 0;
  std::vector<JobRecord> jobs;  // finished jobs by arrival, ties by id
  std::vector<RoundRecord> rounds;
  double makespan = 0.0;
};

// Modified iteration time of a job on an allocation: the slowest allocated
// GPU's penalty, times l_across when the GPUs span nodes, times the base time.
double effective_iter_time(const JobSpec& job, std::span<const GpuId> gpus, bool spans_nodes,
                           std::span<const double> class_values, double l_across);
double effective_iter_time(const Job& job, const Allocation& allocation, const VariabilityProfile& profile,
                           const SimConfig& config);

// Single simulation instance. `profile` must have exactly cluster_size GPUs.
class Simulator {
 public:
  Simulator(std::vector<JobSpec> trace, VariabilityProfile profile, SimConfig config);

  bool done() const { return finished_ == jobs_.size(); }
  RoundRecord run_round();

  std::int64_t round_index() const { return round_; }
  double now() const { return static_cast<double>(round_) * config_.round_duration; }
  const SimConfig& config() const { return config_; }
  const ClusterState& cluster() const { return cluster_; }
  const std::vector<Job>& jobs() const { return jobs_; }
  const placement::Placer& placer() const { return placer_; }

  SimResult result() const;

 private:
  void check_conservation() const;

  SimConfig config_;
  VariabilityProfile profile_;
  ClusterState cluster_;
  placement::Placer placer_;
  std::vector<Job> jobs_;            // sorted by (arrival, id)
  std::vector<std::vector<GpuId>> last_gpus_;
  std::size_t next_arrival_ = 0;
  std::size_t finished_ = 0;
  std::int64_t round_ = 0;
  std::vector<RoundRecord> rounds_;
};

// Samples a larger profile down to the cluster size using config.seed; a
// smaller one is an error. Jobs demanding more than the cluster or naming an
// unknown class are rejected before simulation.
SimResult run_sim(std::span<const JobSpec> trace, const VariabilityProfile& profile, const SimConfig& config);

VariabilityProfile fit_profile(const VariabilityProfile& profile, const SimConfig& config);
void check_trace(std::span<const JobSpec> trace, int cluster_size, int num_classes);

struct OverheadStats {
  int cluster_size = 0;
  std::size_t rounds = 0;  // rounds that placed at least one job
  double min_seconds = 0.0;
  double median_seconds = 0.0;
  double max_seconds = 0.0;
};

// Runs the simulation and summarizes the per-round wall time of placement.
OverheadStats measure_policy_overhead(std::span<const JobSpec> trace, const VariabilityProfile& profile,
                                      const SimConfig& config);

}  // namespace varsched::sim
