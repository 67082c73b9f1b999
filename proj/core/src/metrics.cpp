#include "varsched/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace varsched::metrics {

double geomean(std::span<const double> values) {
  double log_sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (v > 0.0) {
      log_sum += std::log(v);
      ++n;
    }
  }
  return n == 0 ? 0.0 : std::exp(log_sum / static_cast<double>(n));
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) return 0.0;
  if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile must be in (0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
  return sorted[std::max<std::size_t>(rank, 1) - 1];
}

SliceMetrics slice_metrics(std::span<const sim::JobRecord> jobs) {
  SliceMetrics m;
  m.jobs = jobs.size();
  if (jobs.empty()) return m;
  std::vector<double> jct;
  double wait_sum = 0.0;
  for (const auto& j : jobs) {
    jct.push_back(j.jct);
    wait_sum += j.wait;
  }
  double jct_sum = 0.0;
  for (double v : jct) jct_sum += v;
  const auto n = static_cast<double>(jobs.size());
  m.avg_jct = jct_sum / n;
  m.avg_wait = wait_sum / n;
  m.geomean_jct = geomean(jct);
  m.p99_jct = percentile(jct, 99.0);
  return m;
}

Summary compute_metrics(const sim::SimResult& result, std::optional<JobWindow> window) {
  if (window && window->first > window->last) {
    throw std::invalid_argument("job window: first id exceeds last id");
  }
  Summary s;
  std::vector<sim::JobRecord> all;
  std::vector<sim::JobRecord> multi;
  for (const auto& j : result.jobs) {
    if (window && (j.id < window->first || j.id > window->last)) continue;
    all.push_back(j);
    if (j.gpu_demand > 1) multi.push_back(j);
  }
  s.all = slice_metrics(all);
  s.multi_gpu = slice_metrics(multi);
  if (!all.empty()) {
    double first = all.front().arrival;
    double last = all.front().finish;
    for (const auto& j : all) {
      first = std::min(first, j.arrival);
      last = std::max(last, j.finish);
    }
    s.makespan = last - first;
  }
  s.rounds = result.rounds.size();
  if (!result.rounds.empty()) {
    double used = 0.0;
    for (const auto& r : result.rounds) used += r.gpus_in_use;
    s.mean_gpus_in_use = used / static_cast<double>(result.rounds.size());
    if (result.cluster_size > 0) s.utilization = s.mean_gpus_in_use / result.cluster_size;
  }
  return s;
}

}  // namespace varsched::metrics
