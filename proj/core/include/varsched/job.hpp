#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "varsched/cluster.hpp"
#include "varsched/types.hpp"

namespace varsched {

// Immutable job description as it appears in a trace.
struct JobSpec {
  JobId id = 0;
  double arrival_time = 0.0;  // seconds
  int gpu_demand = 1;
  ClassIndex job_class = 0;
  std::int64_t total_iterations = 1;
  double base_iter_time = 1.0;  // seconds per iteration on a median GPU, packed

  friend bool operator==(const JobSpec&, const JobSpec&) = default;
};

enum class JobState { pending, queued, running, suspended, finished };

std::string_view to_string(JobState state);

struct Job {
  JobSpec spec;
  JobState state = JobState::pending;
  double attained_service = 0.0;  // GPU-seconds
  double completed_iterations = 0.0;
  std::optional<Allocation> allocation;
  std::optional<double> start_time;
  std::optional<double> finish_time;
  int migrations = 0;
  int preemptions = 0;

  explicit Job(JobSpec s) : spec(s) {}

  double remaining_iterations() const {
    return static_cast<double>(spec.total_iterations) - completed_iterations;
  }
  // Oracle remaining time on median GPUs without locality penalty.
  double remaining_time() const { return remaining_iterations() * spec.base_iter_time; }
  bool active() const {
    return state == JobState::queued || state == JobState::running || state == JobState::suspended;
  }
};

}  // namespace varsched
