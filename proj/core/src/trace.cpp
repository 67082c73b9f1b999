#include "varsched/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "varsched/csv.hpp"
#include "varsched/rng.hpp"

namespace varsched::trace {

using nlohmann::json;

void TraceSpec::validate() const {
  if (!(arrival_rate > 0.0)) throw std::invalid_argument("trace spec: arrival_rate must be positive");
  if (demand_distribution.empty()) throw std::invalid_argument("trace spec: empty demand distribution");
  if (class_distribution.empty()) throw std::invalid_argument("trace spec: empty class distribution");

  double total = 0.0;
  for (const auto& d : demand_distribution) {
    if (d.gpu_demand < 1) throw std::invalid_argument("trace spec: gpu_demand must be >= 1");
    if (d.probability < 0.0) throw std::invalid_argument("trace spec: negative demand probability");
    if (!(d.iteration_scale > 0.0)) throw std::invalid_argument("trace spec: iteration_scale must be positive");
    total += d.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(fmt::format("trace spec: demand probabilities sum to {}, not 1", total));
  }
  total = 0.0;
  for (const auto& c : class_distribution) {
    if (c.job_class < 0) throw std::invalid_argument("trace spec: negative class");
    if (c.probability < 0.0) throw std::invalid_argument("trace spec: negative class probability");
    total += c.probability;
    const auto it = std::find_if(iterations.begin(), iterations.end(),
                                 [&](const IterationRange& r) { return r.job_class == c.job_class; });
    if (it == iterations.end()) {
      throw std::invalid_argument(
          fmt::format("trace spec: no iteration range for class {}", class_label(c.job_class)));
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(fmt::format("trace spec: class probabilities sum to {}, not 1", total));
  }
  for (const auto& r : iterations) {
    if (r.min_iterations < 1 || r.max_iterations < r.min_iterations) {
      throw std::invalid_argument("trace spec: invalid iteration range");
    }
    if (!(r.min_iter_time > 0.0) || r.max_iter_time < r.min_iter_time) {
      throw std::invalid_argument("trace spec: invalid iteration time range");
    }
  }
}

std::vector<JobSpec> synthesize_trace(const TraceSpec& spec) {
  spec.validate();
  auto rng = make_rng(spec.seed, 0x7ace);
  std::exponential_distribution<double> gap(spec.arrival_rate / 3600.0);

  std::vector<double> demand_w;
  for (const auto& d : spec.demand_distribution) demand_w.push_back(d.probability);
  std::discrete_distribution<std::size_t> pick_demand(demand_w.begin(), demand_w.end());
  std::vector<double> class_w;
  for (const auto& c : spec.class_distribution) class_w.push_back(c.probability);
  std::discrete_distribution<std::size_t> pick_class(class_w.begin(), class_w.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<JobSpec> jobs;
  jobs.reserve(spec.num_jobs);
  double t = 0.0;
  for (std::size_t i = 0; i < spec.num_jobs; ++i) {
    t += gap(rng);
    const auto& demand = spec.demand_distribution[pick_demand(rng)];
    const auto cls = spec.class_distribution[pick_class(rng)].job_class;
    const auto& range = *std::find_if(spec.iterations.begin(), spec.iterations.end(),
                                      [&](const IterationRange& r) { return r.job_class == cls; });
    const double lo = std::log(static_cast<double>(range.min_iterations));
    const double hi = std::log(static_cast<double>(range.max_iterations));
    const double iters = std::exp(lo + (hi - lo) * unit(rng)) * demand.iteration_scale;
    const double iter_time = range.min_iter_time + (range.max_iter_time - range.min_iter_time) * unit(rng);

    JobSpec job;
    job.id = static_cast<JobId>(i);
    job.arrival_time = t;
    job.gpu_demand = demand.gpu_demand;
    job.job_class = cls;
    job.total_iterations = std::max<std::int64_t>(1, std::llround(iters));
    job.base_iter_time = iter_time;
    jobs.push_back(job);
  }
  return jobs;
}

std::vector<JobSpec> parse_trace(std::string_view text, std::string_view source, int num_classes) {
  const auto table = csv::parse(text, source);
  const auto c_id = table.column("job_id", source);
  const auto c_arrival = table.column("arrival_time_s", source);
  const auto c_demand = table.column("gpu_demand", source);
  const auto c_class = table.column("class", source);
  const auto c_iters = table.column("total_iterations", source);
  const auto c_iter_time = table.column("base_iter_time_s", source);

  std::vector<JobSpec> jobs;
  std::set<JobId> seen;
  for (const auto& row : table.rows) {
    const auto fail = [&](const std::string& what) {
      return LoadError(fmt::format("{}:{}: {}", source, row.line, what));
    };
    JobSpec job;
    job.id = csv::to_int(row.fields[c_id], source, row.line, "job_id");
    job.arrival_time = csv::to_double(row.fields[c_arrival], source, row.line, "arrival_time_s");
    job.gpu_demand = static_cast<int>(csv::to_int(row.fields[c_demand], source, row.line, "gpu_demand"));
    job.total_iterations = csv::to_int(row.fields[c_iters], source, row.line, "total_iterations");
    job.base_iter_time = csv::to_double(row.fields[c_iter_time], source, row.line, "base_iter_time_s");
    try {
      job.job_class = parse_class(row.fields[c_class]);
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
    if (job.job_class >= num_classes) {
      throw fail(fmt::format("unknown class '{}' (profile has {} classes)", row.fields[c_class], num_classes));
    }
    if (job.gpu_demand < 1) throw fail(fmt::format("gpu_demand must be positive, got {}", job.gpu_demand));
    if (job.total_iterations < 1) {
      throw fail(fmt::format("total_iterations must be positive, got {}", job.total_iterations));
    }
    if (!(job.base_iter_time > 0.0)) throw fail("base_iter_time_s must be positive");
    if (!(job.arrival_time >= 0.0) || !std::isfinite(job.arrival_time)) {
      throw fail("arrival_time_s must be a non-negative number");
    }
    if (!seen.insert(job.id).second) throw fail(fmt::format("duplicate job_id {}", job.id));
    jobs.push_back(job);
  }
  std::stable_sort(jobs.begin(), jobs.end(), [](const JobSpec& a, const JobSpec& b) {
    if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
    return a.id < b.id;
  });
  return jobs;
}

std::vector<JobSpec> load_trace(const std::filesystem::path& path, int num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(fmt::format("{}: cannot open trace file", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str(), path.string(), num_classes);
}

std::string format_trace(std::span<const JobSpec> jobs) {
  std::string out = "job_id,arrival_time_s,gpu_demand,class,total_iterations,base_iter_time_s\n";
  for (const auto& j : jobs) {
    out += fmt::format("{},{},{},{},{},{}\n", j.id, j.arrival_time, j.gpu_demand, class_label(j.job_class),
                       j.total_iterations, j.base_iter_time);
  }
  return out;
}

void write_trace(const std::filesystem::path& path, std::span<const JobSpec> jobs) {
  csv::write_atomically(path, format_trace(jobs));
}

namespace {

ClassIndex class_from_json(const json& j) {
  if (j.is_number_integer()) return j.get<ClassIndex>();
  return parse_class(j.get<std::string>());
}

}  // namespace

TraceSpec parse_trace_spec(std::string_view json_text) {
  TraceSpec spec;
  try {
    const auto j = json::parse(json_text);
    spec.num_jobs = j.at("num_jobs").get<std::size_t>();
    spec.arrival_rate = j.at("arrival_rate").get<double>();
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& d : j.at("demand_distribution")) {
      spec.demand_distribution.push_back(DemandBucket{d.at("gpu_demand").get<int>(), d.at("probability").get<double>(),
                                                      d.value("iteration_scale", 1.0)});
    }
    for (const auto& c : j.at("class_distribution")) {
      spec.class_distribution.push_back(ClassBucket{class_from_json(c.at("class")), c.at("probability").get<double>()});
    }
    for (const auto& r : j.at("iterations")) {
      spec.iterations.push_back(IterationRange{class_from_json(r.at("class")), r.at("min_iterations").get<std::int64_t>(),
                                               r.at("max_iterations").get<std::int64_t>(),
                                               r.at("min_iter_time_s").get<double>(),
                                               r.at("max_iter_time_s").get<double>()});
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(fmt::format("trace spec: {}", e.what()));
  }
  spec.validate();
  return spec;
}

TraceSpec load_trace_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(fmt::format("{}: cannot open trace spec", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_trace_spec(buf.str());
  } catch (const std::invalid_argument& e) {
    throw LoadError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string format_trace_spec(const TraceSpec& spec) {
  json j;
  j["num_jobs"] = spec.num_jobs;
  j["arrival_rate"] = spec.arrival_rate;
  j["seed"] = spec.seed;
  j["demand_distribution"] = json::array();
  for (const auto& d : spec.demand_distribution) {
    j["demand_distribution"].push_back(
        {{"gpu_demand", d.gpu_demand}, {"probability", d.probability}, {"iteration_scale", d.iteration_scale}});
  }
  j["class_distribution"] = json::array();
  for (const auto& c : spec.class_distribution) {
    j["class_distribution"].push_back({{"class", class_label(c.job_class)}, {"probability", c.probability}});
  }
  j["iterations"] = json::array();
  for (const auto& r : spec.iterations) {
    j["iterations"].push_back({{"class", class_label(r.job_class)},
                               {"min_iterations", r.min_iterations},
                               {"max_iterations", r.max_iterations},
                               {"min_iter_time_s", r.min_iter_time},
                               {"max_iter_time_s", r.max_iter_time}});
  }
  return j.dump(2) + "\n";
}

TraceSpec sia_like_spec(std::uint64_t seed) {
  TraceSpec spec;
  spec.num_jobs = 160;
  spec.arrival_rate = 20.0;
  spec.seed = seed;
  spec.demand_distribution = {{1, 0.40, 1.0}, {2, 0.20, 1.0}, {4, 0.20, 1.0}, {8, 0.12, 1.0},
                              {16, 0.05, 1.0}, {32, 0.02, 1.0}, {48, 0.01, 1.0}};
  spec.class_distribution = {{0, 0.40}, {1, 0.35}, {2, 0.25}};
  spec.iterations = {{0, 2000, 40000, 0.15, 0.45}, {1, 2000, 40000, 0.15, 0.45}, {2, 2000, 40000, 0.15, 0.45}};
  return spec;
}

TraceSpec synergy_like_spec(double arrival_rate, std::size_t num_jobs, std::uint64_t seed) {
  TraceSpec spec;
  spec.num_jobs = num_jobs;
  spec.arrival_rate = arrival_rate;
  spec.seed = seed;
  spec.demand_distribution = {{1, 0.82, 1.0}, {2, 0.06, 2.0}, {4, 0.07, 2.0}, {8, 0.04, 2.0}, {16, 0.01, 2.0}};
  spec.class_distribution = {{0, 0.40}, {1, 0.35}, {2, 0.25}};
  spec.iterations = {{0, 5000, 200000, 0.15, 0.45}, {1, 5000, 200000, 0.15, 0.45}, {2, 5000, 200000, 0.15, 0.45}};
  return spec;
}

TraceSpec preset_spec(std::string_view name, std::uint64_t seed) {
  if (name == "sia-like") return sia_like_spec(seed);
  if (name == "synergy-like") return synergy_like_spec(10.0, 1000, seed);
  throw std::invalid_argument(fmt::format("unknown trace preset '{}'", name));
}

}  // namespace varsched::trace
