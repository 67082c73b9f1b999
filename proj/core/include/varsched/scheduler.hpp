#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "varsched/job.hpp"

namespace varsched::scheduler {

enum class SchedulerKind { fifo, las, srtf };

std::string_view to_string(SchedulerKind kind);
SchedulerKind parse_scheduler(std::string_view name);

// Tiresias-style two-level threshold, in GPU-seconds of attained service.
inline constexpr double kDefaultLasThreshold = 3200.0;

// Arrival order, ties by job id.
std::vector<const Job*> fifo_order(std::span<const Job* const> jobs);

// Jobs below `threshold` attained service form the high-priority queue; each
// queue is FIFO and the high queue precedes the low one.
std::vector<const Job*> las_order(std::span<const Job* const> jobs, double threshold);

// Ascending remaining time (trace oracle), ties by arrival then id.
std::vector<const Job*> srtf_order(std::span<const Job* const> jobs);

std::vector<const Job*> order_jobs(SchedulerKind kind, std::span<const Job* const> jobs,
                                   double las_threshold = kDefaultLasThreshold);

}  // namespace varsched::scheduler
