#include "varsched/scheduler.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace varsched::scheduler {

std::string_view to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::fifo: return "fifo";
    case SchedulerKind::las: return "las";
    case SchedulerKind::srtf: return "srtf";
  }
  return "unknown";
}

SchedulerKind parse_scheduler(std::string_view name) {
  for (auto k : {SchedulerKind::fifo, SchedulerKind::las, SchedulerKind::srtf}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown scheduler '" + std::string(name) + "'");
}

namespace {

bool arrives_first(const Job* a, const Job* b) {
  if (a->spec.arrival_time != b->spec.arrival_time) return a->spec.arrival_time < b->spec.arrival_time;
  return a->spec.id < b->spec.id;
}

}  // namespace

std::vector<const Job*> fifo_order(std::span<const Job* const> jobs) {
  std::vector<const Job*> out(jobs.begin(), jobs.end());
  std::sort(out.begin(), out.end(), arrives_first);
  return out;
}

std::vector<const Job*> las_order(std::span<const Job* const> jobs, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("las_order: threshold must be positive");
  std::vector<const Job*> out(jobs.begin(), jobs.end());
  std::sort(out.begin(), out.end(), [threshold](const Job* a, const Job* b) {
    const bool high_a = a->attained_service < threshold;
    const bool high_b = b->attained_service < threshold;
    if (high_a != high_b) return high_a;
    return arrives_first(a, b);
  });
  return out;
}

std::vector<const Job*> srtf_order(std::span<const Job* const> jobs) {
  std::vector<const Job*> out(jobs.begin(), jobs.end());
  std::sort(out.begin(), out.end(), [](const Job* a, const Job* b) {
    const double ra = a->remaining_time();
    const double rb = b->remaining_time();
    if (ra != rb) return ra < rb;
    return arrives_first(a, b);
  });
  return out;
}

std::vector<const Job*> order_jobs(SchedulerKind kind, std::span<const Job* const> jobs, double las_threshold) {
  switch (kind) {
    case SchedulerKind::fifo: return fifo_order(jobs);
    case SchedulerKind::las: return las_order(jobs, las_threshold);
    case SchedulerKind::srtf: return srtf_order(jobs);
  }
  throw std::logic_error("unhandled scheduler");
}

}  // namespace varsched::scheduler
