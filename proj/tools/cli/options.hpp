#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "varsched/metrics.hpp"
#include "varsched/sim.hpp"
#include "varsched/trace.hpp"

namespace varsched::cli {

// Everything a run or sweep needs. A JSON config file uses the same names
// as the flags (dashes become underscores); flags override the file.
struct Options {
  std::optional<std::string> trace;       // trace CSV path
  std::optional<std::string> trace_spec;  // JSON spec path or preset name
  std::optional<std::string> profile;     // profile CSV path
  bool raw_profile = false;               // profile holds raw_time_ms, normalize on load
  std::optional<double> arrival_rate;     // overrides the trace spec
  std::optional<std::size_t> num_jobs;    // overrides the trace spec
  sim::SimConfig sim;
  std::string out = "out";
  std::vector<std::string> sweep_axis;
  std::vector<std::string> sweep_values;  // one comma-separated list per axis
  int jobs = 1;
  std::optional<metrics::JobWindow> job_window;
};

// Applies every key present in `config` onto `options`. Unknown keys are an
// error so typos do not silently fall back to defaults.
void apply_config(Options& options, const nlohmann::json& config);
void apply_config_file(Options& options, const std::filesystem::path& path);

// Resolved configuration, written into summary.json.
nlohmann::json to_json(const Options& options);
nlohmann::json to_json(const sim::SimConfig& config);

// "A=1.7,C=1.2" or "1.7,1.5,1.2" into a per-class vector; classes not
// named stay unset.
using PerClass = std::vector<std::optional<double>>;
PerClass parse_per_class(const std::string& text);
// "2000:3000" (inclusive).
metrics::JobWindow parse_window(const std::string& text);
std::vector<std::string> split_list(const std::string& text);

// Resolves the trace: a CSV file, or a spec (file or preset) synthesized
// with the run seed and any arrival-rate / job-count overrides.
std::vector<JobSpec> resolve_trace(const Options& options, int num_classes);
trace::TraceSpec resolve_trace_spec(const Options& options);

variability::ProfileFile resolve_profile(const Options& options);

}  // namespace varsched::cli
