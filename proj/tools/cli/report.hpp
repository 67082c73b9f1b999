#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli/options.hpp"
#include "varsched/metrics.hpp"
#include "varsched/sim.hpp"
#include "varsched/variability.hpp"

namespace varsched::cli {

// jobs.csv: job_id,gpu_demand,class,arrival_s,start_s,finish_s,jct_s,wait_s,
//           migrations,preemptions,placement,scheduler,l_across
std::string jobs_csv(const sim::SimResult& result, const sim::SimConfig& config);
// rounds.csv: round,time_s,gpus_in_use,cluster_size,running_jobs,queued_jobs,placement
std::string rounds_csv(const sim::SimResult& result, const sim::SimConfig& config);

nlohmann::json to_json(const metrics::SliceMetrics& m);
nlohmann::json to_json(const metrics::Summary& s);
// Metrics plus the resolved configuration and seed.
nlohmann::json run_summary(const Options& options, const metrics::Summary& summary);

// Per class: k, centroids, outliers and every GPU's score.
nlohmann::json binning_json(const variability::PMBinning& binning, const std::vector<NodeId>& node_ids);

struct SweepRow {
  std::size_t cell = 0;
  std::string status = "ok";  // ok | failed
  std::string error;
  Options options;
  double arrival_rate = 0.0;  // 0 when the trace came from a file
  metrics::Summary summary;
};

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& row);

// overhead.csv: cluster_size,placement,round,placed_jobs,placement_seconds
struct OverheadSample {
  int cluster_size = 0;
  placement::PlacementPolicy policy = placement::PlacementPolicy::pal;
  std::int64_t round = 0;
  int placed_jobs = 0;
  double seconds = 0.0;
};
std::string overhead_csv(const std::vector<OverheadSample>& samples);

}  // namespace varsched::cli
