#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "varsched/sim.hpp"

namespace varsched::metrics {

struct SliceMetrics {
  std::size_t jobs = 0;
  double avg_jct = 0.0;
  double geomean_jct = 0.0;
  double p99_jct = 0.0;
  double avg_wait = 0.0;
};

struct Summary {
  SliceMetrics all;
  SliceMetrics multi_gpu;  // jobs demanding more than one GPU
  double makespan = 0.0;
  double mean_gpus_in_use = 0.0;
  double utilization = 0.0;  // mean_gpus_in_use / cluster size
  std::size_t rounds = 0;
};

// Inclusive job-id range restricting which jobs are aggregated.
struct JobWindow {
  JobId first = 0;
  JobId last = 0;
};

// Geometric mean of strictly positive values; non-positive ones are skipped.
double geomean(std::span<const double> values);
// Nearest-rank percentile, p in (0, 100].
double percentile(std::span<const double> values, double p);

SliceMetrics slice_metrics(std::span<const sim::JobRecord> jobs);

// Empty results give an all-zero summary. With a window, job slices and the
// makespan cover only jobs inside it; utilization always covers every round.
Summary compute_metrics(const sim::SimResult& result, std::optional<JobWindow> window = std::nullopt);

}  // namespace varsched::metrics
