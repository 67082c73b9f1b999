#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varsched/job.hpp"

namespace varsched::trace {

struct DemandBucket {
  int gpu_demand = 1;
  double probability = 0.0;
  // Multiplies the drawn iteration count; lets large jobs run longer.
  double iteration_scale = 1.0;
};

struct ClassBucket {
  ClassIndex job_class = 0;
  double probability = 0.0;
};

// Iterations are drawn log-uniformly, base iteration time uniformly.
struct IterationRange {
  ClassIndex job_class = 0;
  std::int64_t min_iterations = 1;
  std::int64_t max_iterations = 1;
  double min_iter_time = 1.0;
  double max_iter_time = 1.0;
};

struct TraceSpec {
  std::size_t num_jobs = 0;
  double arrival_rate = 1.0;  // jobs per hour
  std::vector<DemandBucket> demand_distribution;
  std::vector<ClassBucket> class_distribution;
  std::vector<IterationRange> iterations;  // one per class in class_distribution
  std::uint64_t seed = 0;

  // Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

// Poisson arrivals (exponential gaps, mean 3600 / arrival_rate seconds);
// demand and class drawn i.i.d. Job ids follow arrival order from 0.
std::vector<JobSpec> synthesize_trace(const TraceSpec& spec);

// CSV columns job_id,arrival_time_s,gpu_demand,class,total_iterations,base_iter_time_s.
// Returned jobs are sorted by arrival (ties by id). Any class index at or
// above `num_classes` is rejected.
std::vector<JobSpec> load_trace(const std::filesystem::path& path, int num_classes = 3);
std::vector<JobSpec> parse_trace(std::string_view text, std::string_view source, int num_classes = 3);

std::string format_trace(std::span<const JobSpec> jobs);
void write_trace(const std::filesystem::path& path, std::span<const JobSpec> jobs);

// JSON (de)serialization of TraceSpec.
TraceSpec parse_trace_spec(std::string_view json_text);
TraceSpec load_trace_spec(const std::filesystem::path& path);
std::string format_trace_spec(const TraceSpec& spec);

// 160 jobs at 20 jobs/hr, 40% single-GPU, demands up to 48 GPUs.
TraceSpec sia_like_spec(std::uint64_t seed = 0);
// Mostly (>80%) short single-GPU jobs with long-running multi-GPU jobs.
TraceSpec synergy_like_spec(double arrival_rate = 10.0, std::size_t num_jobs = 1000, std::uint64_t seed = 0);

// Looks up "sia-like" / "synergy-like"; throws std::invalid_argument otherwise.
TraceSpec preset_spec(std::string_view name, std::uint64_t seed = 0);

}  // namespace varsched::trace
