#include "cli/report.hpp"

#include <fmt/format.h>

namespace varsched::cli {

using nlohmann::json;

std::string jobs_csv(const sim::SimResult& result, const sim::SimConfig& config) {
  std::string out =
      "job_id,gpu_demand,class,arrival_s,start_s,finish_s,jct_s,wait_s,migrations,preemptions,placement,scheduler,"
      "l_across\n";
  for (const auto& j : result.jobs) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", j.id, j.gpu_demand, class_label(j.job_class),
                       j.arrival, j.start, j.finish, j.jct, j.wait, j.migrations, j.preemptions,
                       placement::to_string(config.placement), scheduler::to_string(config.scheduler),
                       config.l_across);
  }
  return out;
}

std::string rounds_csv(const sim::SimResult& result, const sim::SimConfig& config) {
  std::string out = "round,time_s,gpus_in_use,cluster_size,running_jobs,queued_jobs,placement\n";
  for (const auto& r : result.rounds) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.index, r.time, r.gpus_in_use, result.cluster_size, r.running_jobs,
                       r.queued_jobs, placement::to_string(config.placement));
  }
  return out;
}

json to_json(const metrics::SliceMetrics& m) {
  return {{"jobs", m.jobs},
          {"avg_jct_s", m.avg_jct},
          {"geomean_jct_s", m.geomean_jct},
          {"p99_jct_s", m.p99_jct},
          {"avg_wait_s", m.avg_wait}};
}

json to_json(const metrics::Summary& s) {
  return {{"all", to_json(s.all)},
          {"multi_gpu", to_json(s.multi_gpu)},
          {"makespan_s", s.makespan},
          {"mean_gpus_in_use", s.mean_gpus_in_use},
          {"utilization", s.utilization},
          {"rounds", s.rounds}};
}

json run_summary(const Options& options, const metrics::Summary& summary) {
  json j;
  j["seed"] = options.sim.seed;
  j["config"] = to_json(options);
  j["metrics"] = to_json(summary);
  return j;
}

json binning_json(const variability::PMBinning& binning, const std::vector<NodeId>& node_ids) {
  json classes = json::array();
  for (ClassIndex c = 0; c < binning.num_classes(); ++c) {
    const auto& b = binning.at(c);
    json gpus = json::array();
    for (std::size_t g = 0; g < b.gpu_scores.size(); ++g) {
      json entry = {{"gpu_id", g}, {"score", b.gpu_scores[g]}, {"bin", b.gpu_bin[g]}};
      if (g < node_ids.size()) entry["node_id"] = node_ids[g];
      gpus.push_back(entry);
    }
    json outliers = json::array();
    for (auto g : b.outlier_gpus) outliers.push_back({{"gpu_id", g}, {"score", b.gpu_scores[static_cast<std::size_t>(g)]}});
    classes.push_back({{"class", class_label(c)},
                       {"k", b.k_inliers},
                       {"fallback", b.fallback},
                       {"centroids", b.bin_centroids},
                       {"silhouettes", b.silhouettes},
                       {"outliers", outliers},
                       {"gpus", gpus}});
  }
  return {{"classes", classes}};
}

std::string sweep_csv_header() {
  return "cell,status,error,trace,trace_spec,profile,nodes,gpus_per_node,round_duration,l_across,scheduler,placement,"
         "seed,score_mode,las_threshold,arrival_rate,jobs,avg_jct_s,geomean_jct_s,p99_jct_s,avg_wait_s,"
         "multi_gpu_jobs,multi_gpu_avg_jct_s,multi_gpu_geomean_jct_s,multi_gpu_p99_jct_s,multi_gpu_avg_wait_s,"
         "makespan_s,mean_gpus_in_use,utilization,rounds\n";
}

namespace {

// Commas and newlines would break the plain CSV reader.
std::string sanitize(std::string s) {
  for (auto& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

}  // namespace

std::string sweep_csv_row(const SweepRow& row) {
  const auto& o = row.options;
  const auto& c = o.sim;
  const auto& s = row.summary;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                     row.cell, row.status, sanitize(row.error), sanitize(o.trace.value_or("")),
                     sanitize(o.trace_spec.value_or("")), sanitize(o.profile.value_or("")), c.nodes, c.gpus_per_node,
                     c.round_duration, c.l_across, scheduler::to_string(c.scheduler),
                     placement::to_string(c.placement), c.seed, sim::to_string(c.score_mode), c.las_threshold,
                     row.arrival_rate, s.all.jobs, s.all.avg_jct, s.all.geomean_jct, s.all.p99_jct, s.all.avg_wait,
                     s.multi_gpu.jobs, s.multi_gpu.avg_jct, s.multi_gpu.geomean_jct, s.multi_gpu.p99_jct,
                     s.multi_gpu.avg_wait, s.makespan, s.mean_gpus_in_use, s.utilization, s.rounds);
}

std::string overhead_csv(const std::vector<OverheadSample>& samples) {
  std::string out = "cluster_size,placement,round,placed_jobs,placement_seconds\n";
  for (const auto& s : samples) {
    out += fmt::format("{},{},{},{},{}\n", s.cluster_size, placement::to_string(s.policy), s.round, s.placed_jobs,
                       s.seconds);
  }
  return out;
}

}  // namespace varsched::cli
