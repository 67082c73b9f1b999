#include "cli/options.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "varsched/csv.hpp"

namespace varsched::cli {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& field : csv::split(text, ',')) {
    const auto t = csv::trim(field);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

namespace {

double parse_number(const std::string& text, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw std::invalid_argument(fmt::format("{}: '{}' is not a number", what, text));
  return v;
}

PerClass per_class_from_json(const json& j) {
  if (j.is_string()) return parse_per_class(j.get<std::string>());
  PerClass out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    return out;
  }
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      const auto cls = static_cast<std::size_t>(parse_class(key));
      if (out.size() <= cls) out.resize(cls + 1);
      out[cls] = value.get<double>();
    }
    return out;
  }
  throw std::invalid_argument("l_across_per_class must be a string, array or object");
}

std::vector<std::string> strings_from_json(const json& j) {
  if (j.is_string()) return {j.get<std::string>()};
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  return out;
}

}  // namespace

PerClass parse_per_class(const std::string& text) {
  PerClass out;
  for (const auto& item : split_list(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      out.push_back(parse_number(item, "l_across_per_class"));
      continue;
    }
    const auto cls = static_cast<std::size_t>(parse_class(csv::trim(std::string_view(item).substr(0, eq))));
    if (out.size() <= cls) out.resize(cls + 1);
    out[cls] = parse_number(std::string(csv::trim(std::string_view(item).substr(eq + 1))), "l_across_per_class");
  }
  return out;
}

metrics::JobWindow parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument(fmt::format("job window '{}' must be FIRST:LAST", text));
  metrics::JobWindow w;
  w.first = static_cast<JobId>(parse_number(text.substr(0, colon), "job window"));
  w.last = static_cast<JobId>(parse_number(text.substr(colon + 1), "job window"));
  if (w.last < w.first) throw std::invalid_argument(fmt::format("job window '{}' is empty", text));
  return w;
}

void apply_config(Options& o, const json& config) {
  if (!config.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::set<std::string> known = {
      "trace",  "trace_spec",   "profile", "raw_profile",   "arrival_rate",  "num_jobs",
      "nodes",  "gpus_per_node", "round_duration", "l_across", "l_across_per_class", "scheduler",
      "placement", "seed", "score_mode", "las_threshold", "out", "sweep_axis", "sweep_values",
      "jobs", "job_window"};
  for (const auto& [key, _] : config.items()) {
    if (!known.contains(key)) throw std::invalid_argument(fmt::format("config: unknown key '{}'", key));
  }
  try {
    if (config.contains("trace")) o.trace = config["trace"].get<std::string>();
    if (config.contains("trace_spec")) o.trace_spec = config["trace_spec"].get<std::string>();
    if (config.contains("profile")) o.profile = config["profile"].get<std::string>();
    if (config.contains("raw_profile")) o.raw_profile = config["raw_profile"].get<bool>();
    if (config.contains("arrival_rate")) o.arrival_rate = config["arrival_rate"].get<double>();
    if (config.contains("num_jobs")) o.num_jobs = config["num_jobs"].get<std::size_t>();
    if (config.contains("nodes")) o.sim.nodes = config["nodes"].get<int>();
    if (config.contains("gpus_per_node")) o.sim.gpus_per_node = config["gpus_per_node"].get<int>();
    if (config.contains("round_duration")) o.sim.round_duration = config["round_duration"].get<double>();
    if (config.contains("l_across")) o.sim.l_across = config["l_across"].get<double>();
    if (config.contains("l_across_per_class")) o.sim.l_across_per_class = per_class_from_json(config["l_across_per_class"]);
    if (config.contains("scheduler")) o.sim.scheduler = scheduler::parse_scheduler(config["scheduler"].get<std::string>());
    if (config.contains("placement")) o.sim.placement = placement::parse_placement(config["placement"].get<std::string>());
    if (config.contains("seed")) o.sim.seed = config["seed"].get<std::uint64_t>();
    if (config.contains("score_mode")) o.sim.score_mode = sim::parse_score_mode(config["score_mode"].get<std::string>());
    if (config.contains("las_threshold")) o.sim.las_threshold = config["las_threshold"].get<double>();
    if (config.contains("out")) o.out = config["out"].get<std::string>();
    if (config.contains("sweep_axis")) o.sweep_axis = strings_from_json(config["sweep_axis"]);
    if (config.contains("sweep_values")) o.sweep_values = strings_from_json(config["sweep_values"]);
    if (config.contains("jobs")) o.jobs = config["jobs"].get<int>();
    if (config.contains("job_window")) {
      const auto& w = config["job_window"];
      if (w.is_string()) {
        o.job_window = parse_window(w.get<std::string>());
      } else {
        o.job_window = metrics::JobWindow{w.at(0).get<JobId>(), w.at(1).get<JobId>()};
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(fmt::format("config: {}", e.what()));
  }
}

void apply_config_file(Options& options, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(fmt::format("{}: cannot open config file", path.string()));
  json config;
  try {
    config = json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError(fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    apply_config(options, config);
  } catch (const std::invalid_argument& e) {
    throw LoadError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

json to_json(const sim::SimConfig& c) {
  json j;
  j["nodes"] = c.nodes;
  j["gpus_per_node"] = c.gpus_per_node;
  j["round_duration"] = c.round_duration;
  j["l_across"] = c.l_across;
  auto per_class = json::array();
  for (const auto& l : c.l_across_per_class) per_class.push_back(l ? json(*l) : json(nullptr));
  j["l_across_per_class"] = per_class;
  j["scheduler"] = scheduler::to_string(c.scheduler);
  j["placement"] = placement::to_string(c.placement);
  j["seed"] = c.seed;
  j["score_mode"] = sim::to_string(c.score_mode);
  j["las_threshold"] = c.las_threshold;
  return j;
}

json to_json(const Options& o) {
  json j = to_json(o.sim);
  j["trace"] = o.trace ? json(*o.trace) : json(nullptr);
  j["trace_spec"] = o.trace_spec ? json(*o.trace_spec) : json(nullptr);
  j["profile"] = o.profile ? json(*o.profile) : json(nullptr);
  j["raw_profile"] = o.raw_profile;
  j["arrival_rate"] = o.arrival_rate ? json(*o.arrival_rate) : json(nullptr);
  j["num_jobs"] = o.num_jobs ? json(*o.num_jobs) : json(nullptr);
  j["job_window"] = o.job_window ? json::array({o.job_window->first, o.job_window->last}) : json(nullptr);
  return j;
}

trace::TraceSpec resolve_trace_spec(const Options& o) {
  if (!o.trace_spec) throw std::invalid_argument("no trace spec given");
  trace::TraceSpec spec;
  if (*o.trace_spec == "sia-like" || *o.trace_spec == "synergy-like") {
    spec = trace::preset_spec(*o.trace_spec);
  } else {
    spec = trace::load_trace_spec(*o.trace_spec);
  }
  spec.seed = o.sim.seed;
  if (o.arrival_rate) spec.arrival_rate = *o.arrival_rate;
  if (o.num_jobs) spec.num_jobs = *o.num_jobs;
  spec.validate();
  return spec;
}

std::vector<JobSpec> resolve_trace(const Options& o, int num_classes) {
  if (o.trace && o.trace_spec) throw std::invalid_argument("give either --trace or --trace-spec, not both");
  if (o.trace) {
    if (o.arrival_rate || o.num_jobs) {
      throw std::invalid_argument("arrival_rate and num_jobs apply only to synthesized traces");
    }
    return trace::load_trace(*o.trace, num_classes);
  }
  if (o.trace_spec) return trace::synthesize_trace(resolve_trace_spec(o));
  throw std::invalid_argument("no trace given (use --trace or --trace-spec)");
}

variability::ProfileFile resolve_profile(const Options& o) {
  if (!o.profile) throw std::invalid_argument("no profile given (use --profile)");
  return variability::load_profile(*o.profile, o.raw_profile);
}

}  // namespace varsched::cli
