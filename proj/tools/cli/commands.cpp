#include "cli/commands.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "varsched/csv.hpp"

namespace varsched::cli {

namespace fs = std::filesystem;
using nlohmann::json;

RunOutput execute(const Options& options, std::span<const JobSpec> trace,
                  const variability::VariabilityProfile& profile) {
  RunOutput out;
  out.result = sim::run_sim(trace, profile, options.sim);
  out.summary = metrics::compute_metrics(out.result, options.job_window);
  out.summary_json = run_summary(options, out.summary);
  return out;
}

void write_run_outputs(const fs::path& dir, const Options& options, const RunOutput& output) {
  fs::create_directories(dir);
  csv::write_atomically(dir / "jobs.csv", jobs_csv(output.result, options.sim));
  csv::write_atomically(dir / "rounds.csv", rounds_csv(output.result, options.sim));
  csv::write_atomically(dir / "summary.json", output.summary_json.dump(2) + "\n");
}

RunOutput cmd_run(const Options& options) {
  options.sim.validate();
  const auto profile = resolve_profile(options);
  const auto trace = resolve_trace(options, profile.profile.num_classes());
  auto output = execute(options, trace, profile.profile);
  write_run_outputs(options.out, options, output);
  return output;
}

namespace {

enum class Axis { l_across, job_load, placement, scheduler, seed };

Axis parse_axis(const std::string& name) {
  if (name == "l_across" || name == "l-across") return Axis::l_across;
  if (name == "job_load" || name == "job-load") return Axis::job_load;
  if (name == "placement") return Axis::placement;
  if (name == "scheduler") return Axis::scheduler;
  if (name == "seed") return Axis::seed;
  throw std::invalid_argument(
      fmt::format("unknown sweep axis '{}' (expected l_across, job_load, placement, scheduler or seed)", name));
}

double to_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw std::invalid_argument(fmt::format("sweep value '{}' is not a number", text));
  return v;
}

void apply_axis(Options& o, Axis axis, const std::string& value) {
  switch (axis) {
    case Axis::l_across: o.sim.l_across = to_number(value); break;
    case Axis::job_load: o.arrival_rate = to_number(value); break;
    case Axis::placement: o.sim.placement = placement::parse_placement(value); break;
    case Axis::scheduler: o.sim.scheduler = scheduler::parse_scheduler(value); break;
    case Axis::seed: {
      const double v = to_number(value);
      if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
        throw std::invalid_argument(fmt::format("seed '{}' must be a non-negative integer", value));
      }
      o.sim.seed = static_cast<std::uint64_t>(v);
      break;
    }
  }
}

}  // namespace

std::vector<Options> expand_sweep(const Options& base) {
  if (base.sweep_axis.empty()) throw std::invalid_argument("sweep needs at least one --sweep-axis");
  if (base.sweep_axis.size() != base.sweep_values.size()) {
    throw std::invalid_argument(fmt::format("{} sweep axes but {} value lists", base.sweep_axis.size(),
                                            base.sweep_values.size()));
  }
  std::vector<Options> cells{base};
  for (std::size_t a = 0; a < base.sweep_axis.size(); ++a) {
    const auto axis = parse_axis(base.sweep_axis[a]);
    auto values = split_list(base.sweep_values[a]);
    if (axis == Axis::placement && values.size() == 1 && values[0] == "all") {
      values.clear();
      for (auto p : placement::kAllPolicies) values.emplace_back(placement::to_string(p));
    }
    if (values.empty()) throw std::invalid_argument(fmt::format("sweep axis '{}' has no values", base.sweep_axis[a]));
    if (axis == Axis::job_load && base.trace) throw std::invalid_argument("the job_load axis needs --trace-spec");
    std::vector<Options> next;
    for (const auto& cell : cells) {
      for (const auto& v : values) {
        Options o = cell;
        apply_axis(o, axis, v);
        o.sim.validate();
        next.push_back(std::move(o));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

SweepOutcome cmd_sweep(const Options& base) {
  const auto cells = expand_sweep(base);
  const auto profile = resolve_profile(base);
  const int num_classes = profile.profile.num_classes();
  std::optional<std::vector<JobSpec>> shared_trace;
  if (base.trace) shared_trace = resolve_trace(base, num_classes);

  const fs::path out_dir = base.out;
  fs::create_directories(out_dir / "cells");

  SweepOutcome outcome;
  outcome.rows.resize(cells.size());
  std::vector<int> codes(cells.size(), 0);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  const auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepRow& row = outcome.rows[i];
      row.cell = i;
      row.options = cells[i];
      try {
        std::vector<JobSpec> synthesized;
        std::span<const JobSpec> trace;
        if (shared_trace) {
          trace = *shared_trace;
        } else {
          const auto spec = resolve_trace_spec(cells[i]);
          row.arrival_rate = spec.arrival_rate;
          synthesized = trace::synthesize_trace(spec);
          trace = synthesized;
        }
        const auto output = execute(cells[i], trace, profile.profile);
        row.summary = output.summary;
        write_run_outputs(out_dir / "cells" / fmt::format("cell-{:04d}", i), cells[i], output);
      } catch (const InvariantViolation& e) {
        row.status = "failed";
        row.error = e.what();
        codes[i] = 2;
      } catch (const std::exception& e) {
        row.status = "failed";
        row.error = e.what();
        codes[i] = 1;
      }
      if (codes[i] != 0) {
        std::lock_guard lock(log_mutex);
        fmt::print(stderr, "sweep cell {} failed: {}\n", i, row.error);
      }
    }
  };

  const auto threads = static_cast<std::size_t>(std::max(1, base.jobs));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(threads, cells.size()); ++t) pool.emplace_back(worker);
    worker();
  }

  std::string csv = sweep_csv_header();
  for (const auto& row : outcome.rows) csv += sweep_csv_row(row);
  csv::write_atomically(out_dir / "sweep.csv", csv);
  for (int c : codes) outcome.exit_code = std::max(outcome.exit_code, c);
  return outcome;
}

void cmd_bin_profile(const fs::path& profile_path, bool raw_profile, const fs::path& out, std::uint64_t seed) {
  const auto file = variability::load_profile(profile_path, raw_profile);
  const auto binning = variability::bin_pm_scores(file.profile, seed);
  auto j = binning_json(binning, file.node_ids);
  j["profile"] = profile_path.string();
  j["seed"] = seed;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  csv::write_atomically(out, j.dump(2) + "\n");
}

void cmd_gen_trace(const std::string& spec_or_preset, std::optional<std::uint64_t> seed,
                   std::optional<double> arrival_rate, std::optional<std::size_t> num_jobs, const fs::path& out) {
  trace::TraceSpec spec;
  if (spec_or_preset == "sia-like" || spec_or_preset == "synergy-like") {
    spec = trace::preset_spec(spec_or_preset);
  } else {
    spec = trace::load_trace_spec(spec_or_preset);
  }
  if (seed) spec.seed = *seed;
  if (arrival_rate) spec.arrival_rate = *arrival_rate;
  if (num_jobs) spec.num_jobs = *num_jobs;
  const auto jobs = trace::synthesize_trace(spec);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  trace::write_trace(out, jobs);
}

void cmd_gen_profile(std::size_t num_gpus, int gpus_per_node, std::uint64_t seed, const fs::path& out) {
  const auto profile = variability::synthesize_profile(variability::heavy_tail_profile_spec(num_gpus, seed));
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  variability::write_profile(out, profile, gpus_per_node);
}

std::vector<sim::OverheadStats> cmd_overhead(const Options& options, const std::vector<int>& cluster_sizes,
                                             const std::vector<placement::PlacementPolicy>& policies) {
  const auto profile = resolve_profile(options);
  const auto trace = resolve_trace(options, profile.profile.num_classes());
  std::vector<sim::OverheadStats> stats;
  std::vector<OverheadSample> samples;
  std::string summary = "cluster_size,placement,rounds,min_seconds,median_seconds,max_seconds\n";
  for (int size : cluster_sizes) {
    if (size < 1 || size % options.sim.gpus_per_node != 0) {
      throw std::invalid_argument(
          fmt::format("cluster size {} is not a multiple of {} GPUs per node", size, options.sim.gpus_per_node));
    }
    std::vector<JobSpec> fitting;
    for (const auto& j : trace) {
      if (j.gpu_demand <= size) fitting.push_back(j);
    }
    for (auto policy : policies) {
      Options o = options;
      o.sim.nodes = size / options.sim.gpus_per_node;
      o.sim.placement = policy;
      const auto result = sim::run_sim(fitting, profile.profile, o.sim);
      std::vector<double> times;
      for (const auto& r : result.rounds) {
        if (r.placed_jobs == 0) continue;
        samples.push_back({size, policy, r.index, r.placed_jobs, r.placement_seconds});
        times.push_back(r.placement_seconds);
      }
      sim::OverheadStats s;
      s.cluster_size = size;
      s.rounds = times.size();
      if (!times.empty()) {
        std::sort(times.begin(), times.end());
        s.min_seconds = times.front();
        s.max_seconds = times.back();
        s.median_seconds = variability::median(times);
      }
      summary += fmt::format("{},{},{},{},{},{}\n", size, placement::to_string(policy), s.rounds, s.min_seconds,
                             s.median_seconds, s.max_seconds);
      stats.push_back(s);
    }
  }
  const fs::path out_dir = options.out;
  fs::create_directories(out_dir);
  csv::write_atomically(out_dir / "overhead.csv", overhead_csv(samples));
  csv::write_atomically(out_dir / "overhead_summary.csv", summary);
  return stats;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const InvariantViolation& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::logic_error& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}

}  // namespace varsched::cli
