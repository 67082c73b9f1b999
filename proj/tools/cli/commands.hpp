#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli/options.hpp"
#include "cli/report.hpp"

namespace varsched::cli {

struct RunOutput {
  sim::SimResult result;
  metrics::Summary summary;
  nlohmann::json summary_json;
};

RunOutput execute(const Options& options, std::span<const JobSpec> trace,
                  const variability::VariabilityProfile& profile);

// Writes jobs.csv, rounds.csv and summary.json into `dir`.
void write_run_outputs(const std::filesystem::path& dir, const Options& options, const RunOutput& output);

RunOutput cmd_run(const Options& options);

// Sweep axes: l_across, job_load (arrival rate, needs a trace spec),
// placement, scheduler, seed. "all" expands the placement axis to every
// policy. Writes sweep.csv plus one output directory per cell.
struct SweepOutcome {
  std::vector<SweepRow> rows;
  int exit_code = 0;  // worst cell outcome: 0 ok, 1 input error, 2 invariant violation
};
SweepOutcome cmd_sweep(const Options& options);
std::vector<Options> expand_sweep(const Options& base);

void cmd_bin_profile(const std::filesystem::path& profile, bool raw_profile, const std::filesystem::path& out,
                     std::uint64_t seed);

// Writes a synthesized trace CSV. `seed` overrides the spec's own seed.
void cmd_gen_trace(const std::string& spec_or_preset, std::optional<std::uint64_t> seed,
                   std::optional<double> arrival_rate, std::optional<std::size_t> num_jobs,
                   const std::filesystem::path& out);

void cmd_gen_profile(std::size_t num_gpus, int gpus_per_node, std::uint64_t seed, const std::filesystem::path& out);

// Times placement per round for each cluster size and policy. Jobs larger
// than a cluster are left out of that cluster's run.
std::vector<sim::OverheadStats> cmd_overhead(const Options& options, const std::vector<int>& cluster_sizes,
                                             const std::vector<placement::PlacementPolicy>& policies);

// Runs `body` and maps exceptions to exit codes, printing a diagnostic:
// 1 for input errors, 2 for invariant violations.
int guarded(const std::function<int()>& body);

}  // namespace varsched::cli
