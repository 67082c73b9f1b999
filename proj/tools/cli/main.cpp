#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cli/commands.hpp"

namespace vc = varsched::cli;

namespace {

// Flags shared by run, sweep and overhead. Unset flags leave the config
// file (or the built-in default) in place.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> trace;
  std::optional<std::string> trace_spec;
  std::optional<std::string> profile;
  bool raw_profile = false;
  std::optional<double> arrival_rate;
  std::optional<std::size_t> num_jobs;
  std::optional<int> nodes;
  std::optional<int> gpus_per_node;
  std::optional<std::string> scheduler;
  std::optional<std::string> placement;
  std::optional<double> l_across;
  std::optional<std::string> l_across_per_class;
  std::optional<double> round_duration;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> score_mode;
  std::optional<double> las_threshold;
  std::optional<std::string> job_window;
  std::vector<std::string> sweep_axis;
  std::vector<std::string> sweep_values;
  std::optional<int> jobs;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override its values");
  app->add_option("--trace", f.trace, "Trace CSV file");
  app->add_option("--trace-spec", f.trace_spec, "Trace spec JSON file, or preset: sia-like, synergy-like");
  app->add_option("--profile", f.profile, "Variability profile CSV");
  app->add_flag("--raw-profile", f.raw_profile, "Profile holds raw_time_ms; normalize per class on load");
  app->add_option("--arrival-rate", f.arrival_rate, "Override the trace spec arrival rate (jobs/hour)");
  app->add_option("--num-jobs", f.num_jobs, "Override the trace spec job count");
  app->add_option("--nodes", f.nodes, "Number of nodes");
  app->add_option("--gpus-per-node", f.gpus_per_node, "GPUs per node");
  app->add_option("--scheduler", f.scheduler, "fifo, las or srtf");
  app->add_option("--placement", f.placement,
                  "packed-sticky, packed-nonsticky, random-sticky, random-nonsticky, pm-first or pal");
  app->add_option("--l-across", f.l_across, "Locality penalty for jobs spanning nodes");
  app->add_option("--l-across-per-class", f.l_across_per_class, "Per-class locality penalty, e.g. A=1.7,B=1.3");
  app->add_option("--round-duration", f.round_duration, "Scheduling round length in seconds");
  app->add_option("--seed", f.seed, "Seed for binning, random placement, sampling and trace synthesis");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--score-mode", f.score_mode, "binned or raw: the scores placement policies see");
  app->add_option("--las-threshold", f.las_threshold, "LAS attained-service threshold in GPU-seconds");
  app->add_option("--job-window", f.job_window, "Only aggregate job ids FIRST:LAST (inclusive)");
}

vc::Options resolve(const Flags& f) {
  namespace vs = varsched;
  vc::Options o;
  if (f.config) vc::apply_config_file(o, *f.config);
  if (f.trace) o.trace = f.trace;
  if (f.trace_spec) o.trace_spec = f.trace_spec;
  if (f.trace && !f.trace_spec) o.trace_spec.reset();
  if (f.trace_spec && !f.trace) o.trace.reset();
  if (f.profile) o.profile = f.profile;
  if (f.raw_profile) o.raw_profile = true;
  if (f.arrival_rate) o.arrival_rate = f.arrival_rate;
  if (f.num_jobs) o.num_jobs = f.num_jobs;
  if (f.nodes) o.sim.nodes = *f.nodes;
  if (f.gpus_per_node) o.sim.gpus_per_node = *f.gpus_per_node;
  if (f.scheduler) o.sim.scheduler = vs::scheduler::parse_scheduler(*f.scheduler);
  if (f.placement) o.sim.placement = vs::placement::parse_placement(*f.placement);
  if (f.l_across) o.sim.l_across = *f.l_across;
  if (f.l_across_per_class) o.sim.l_across_per_class = vc::parse_per_class(*f.l_across_per_class);
  if (f.round_duration) o.sim.round_duration = *f.round_duration;
  if (f.seed) o.sim.seed = *f.seed;
  if (f.out) o.out = *f.out;
  if (f.score_mode) o.sim.score_mode = vs::sim::parse_score_mode(*f.score_mode);
  if (f.las_threshold) o.sim.las_threshold = *f.las_threshold;
  if (f.job_window) o.job_window = vc::parse_window(*f.job_window);
  if (!f.sweep_axis.empty()) o.sweep_axis = f.sweep_axis;
  if (!f.sweep_values.empty()) o.sweep_values = f.sweep_values;
  if (f.jobs) o.jobs = *f.jobs;
  o.sim.validate();
  return o;
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : vc::split_list(text)) out.push_back(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPU cluster scheduling simulator with variability-aware placement"};
  app.require_subcommand(1);

  Flags run_flags;
  auto* run = app.add_subcommand("run", "Run one simulation; writes jobs.csv, rounds.csv, summary.json");
  add_common(run, run_flags);

  Flags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Run the cross product of sweep values; writes sweep.csv");
  add_common(sweep, sweep_flags);
  sweep->add_option("--sweep-axis", sweep_flags.sweep_axis, "l_across, job_load, placement, scheduler or seed")
      ->take_all();
  sweep->add_option("--sweep-values", sweep_flags.sweep_values, "Comma-separated values, one list per axis")
      ->take_all();
  sweep->add_option("--jobs", sweep_flags.jobs, "Cells run concurrently");

  std::string bin_profile_path;
  std::string bin_out;
  bool bin_raw = false;
  std::uint64_t bin_seed = 0;
  auto* bin = app.add_subcommand("bin-profile", "Bin a variability profile into PM-Scores; writes JSON");
  bin->add_option("--profile", bin_profile_path, "Variability profile CSV")->required();
  bin->add_option("--out", bin_out, "Output JSON path")->required();
  bin->add_flag("--raw-profile", bin_raw, "Profile holds raw_time_ms");
  bin->add_option("--seed", bin_seed, "K-means seed");

  std::string gen_spec;
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> gen_rate;
  std::optional<std::size_t> gen_jobs;
  std::string gen_out;
  auto* gen_trace = app.add_subcommand("gen-trace", "Synthesize a trace CSV from a spec or preset");
  gen_trace->add_option("--trace-spec", gen_spec, "Trace spec JSON file, or preset: sia-like, synergy-like")
      ->required();
  gen_trace->add_option("--seed", gen_seed, "Overrides the spec seed");
  gen_trace->add_option("--arrival-rate", gen_rate, "Overrides the spec arrival rate (jobs/hour)");
  gen_trace->add_option("--num-jobs", gen_jobs, "Overrides the spec job count");
  gen_trace->add_option("--out", gen_out, "Output CSV path")->required();

  std::size_t prof_gpus = 256;
  int prof_gpn = 4;
  std::uint64_t prof_seed = 0;
  std::string prof_out;
  auto* gen_profile = app.add_subcommand("gen-profile", "Synthesize a heavy-tailed three-class profile CSV");
  gen_profile->add_option("--gpus", prof_gpus, "Number of GPUs");
  gen_profile->add_option("--gpus-per-node", prof_gpn, "GPUs per node (for node_id)");
  gen_profile->add_option("--seed", prof_seed, "Seed");
  gen_profile->add_option("--out", prof_out, "Output CSV path")->required();

  Flags over_flags;
  std::string over_sizes = "4,16,64,256";
  std::string over_policies = "pal,pm-first,packed-sticky";
  auto* overhead = app.add_subcommand("overhead", "Time placement per round across cluster sizes");
  add_common(overhead, over_flags);
  overhead->add_option("--cluster-sizes", over_sizes, "Comma-separated GPU counts");
  overhead->add_option("--policies", over_policies, "Comma-separated placement policies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*run) {
    return vc::guarded([&] {
      vc::cmd_run(resolve(run_flags));
      return 0;
    });
  }
  if (*sweep) {
    return vc::guarded([&] {
      const auto outcome = vc::cmd_sweep(resolve(sweep_flags));
      std::size_t failed = 0;
      for (const auto& r : outcome.rows) failed += r.status != "ok";
      if (failed > 0) fmt::print(stderr, "{} of {} sweep cells failed\n", failed, outcome.rows.size());
      return outcome.exit_code;
    });
  }
  if (*bin) {
    return vc::guarded([&] {
      vc::cmd_bin_profile(bin_profile_path, bin_raw, bin_out, bin_seed);
      return 0;
    });
  }
  if (*gen_trace) {
    return vc::guarded([&] {
      vc::cmd_gen_trace(gen_spec, gen_seed, gen_rate, gen_jobs, gen_out);
      return 0;
    });
  }
  if (*gen_profile) {
    return vc::guarded([&] {
      vc::cmd_gen_profile(prof_gpus, prof_gpn, prof_seed, prof_out);
      return 0;
    });
  }
  if (*overhead) {
    return vc::guarded([&] {
      const auto options = resolve(over_flags);
      std::vector<varsched::placement::PlacementPolicy> policies;
      for (const auto& p : vc::split_list(over_policies)) policies.push_back(varsched::placement::parse_placement(p));
      for (const auto& s : vc::cmd_overhead(options, parse_sizes(over_sizes), policies)) {
        fmt::print("{} GPUs: {} rounds, placement min {:.6f}s median {:.6f}s max {:.6f}s\n", s.cluster_size, s.rounds,
                   s.min_seconds, s.median_seconds, s.max_seconds);
      }
      return 0;
    });
  }
  return 1;
}
