#include "varsched/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace varsched::sim {

std::string_view to_string(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::binned: return "binned";
    case ScoreMode::raw: return "raw";
  }
  return "?";
}

ScoreMode parse_score_mode(std::string_view name) {
  if (name == "binned") return ScoreMode::binned;
  if (name == "raw") return ScoreMode::raw;
  throw std::invalid_argument(fmt::format("unknown score mode '{}' (expected binned or raw)", name));
}

double SimConfig::l_across_for(ClassIndex cls) const {
  if (cls >= 0 && static_cast<std::size_t>(cls) < l_across_per_class.size()) {
    return l_across_per_class[static_cast<std::size_t>(cls)].value_or(l_across);
  }
  return l_across;
}

void SimConfig::validate() const {
  if (nodes < 1) throw std::invalid_argument("config: nodes must be at least 1");
  if (gpus_per_node < 1) throw std::invalid_argument("config: gpus_per_node must be at least 1");
  if (!(round_duration > 0.0) || !std::isfinite(round_duration)) {
    throw std::invalid_argument("config: round_duration must be positive");
  }
  if (!(l_across >= 1.0) || !std::isfinite(l_across)) throw std::invalid_argument("config: l_across must be >= 1");
  for (const auto& l : l_across_per_class) {
    if (l && !(*l >= 1.0 && std::isfinite(*l))) throw std::invalid_argument("config: per-class l_across must be >= 1");
  }
  if (!(las_threshold > 0.0)) throw std::invalid_argument("config: las_threshold must be positive");
}

double effective_iter_time(const JobSpec& job, std::span<const GpuId> gpus, bool spans_nodes,
                           std::span<const double> class_values, double l_across) {
  double worst = 0.0;
  for (auto g : gpus) worst = std::max(worst, class_values[static_cast<std::size_t>(g)]);
  const double locality = spans_nodes ? l_across : 1.0;
  return locality * worst * job.base_iter_time;
}

double effective_iter_time(const Job& job, const Allocation& allocation, const VariabilityProfile& profile,
                           const SimConfig& config) {
  return effective_iter_time(job.spec, allocation.gpu_ids, allocation.spans_nodes,
                             profile.values(job.spec.job_class), config.l_across_for(job.spec.job_class));
}

namespace {

placement::Placer make_placer(const VariabilityProfile& profile, const SimConfig& config) {
  auto view = config.score_mode == ScoreMode::raw ? variability::PMBinning::identity(profile)
                                                  : variability::bin_pm_scores(profile, config.seed);
  std::vector<double> l_across;
  for (ClassIndex c = 0; c < profile.num_classes(); ++c) l_across.push_back(config.l_across_for(c));
  return placement::Placer(config.placement, std::move(view), std::move(l_across), config.seed);
}

}  // namespace

void check_trace(std::span<const JobSpec> trace, int cluster_size, int num_classes) {
  for (const auto& j : trace) {
    if (j.gpu_demand > cluster_size) {
      throw std::invalid_argument(fmt::format("job {} demands {} GPUs but the cluster has {}", j.id,
                                              j.gpu_demand, cluster_size));
    }
    if (j.job_class < 0 || j.job_class >= num_classes) {
      throw std::invalid_argument(fmt::format("job {} has class {} but the profile has {} classes", j.id,
                                              j.job_class, num_classes));
    }
  }
}

VariabilityProfile fit_profile(const VariabilityProfile& profile, const SimConfig& config) {
  const auto size = static_cast<std::size_t>(config.cluster_size());
  if (profile.num_gpus() < size) {
    throw std::invalid_argument(
        fmt::format("profile covers {} GPUs but the cluster has {}", profile.num_gpus(), size));
  }
  if (profile.num_gpus() == size) return profile;
  return variability::sample_profile(profile, size, config.seed);
}

Simulator::Simulator(std::vector<JobSpec> trace, VariabilityProfile profile, SimConfig config)
    : config_(std::move(config)),
      profile_(std::move(profile)),
      cluster_(config_.nodes, config_.gpus_per_node),
      placer_(make_placer(profile_, config_)) {
  config_.validate();
  if (profile_.num_gpus() != static_cast<std::size_t>(config_.cluster_size())) {
    throw std::invalid_argument(fmt::format("profile has {} GPUs, cluster has {}", profile_.num_gpus(),
                                            config_.cluster_size()));
  }
  check_trace(trace, config_.cluster_size(), profile_.num_classes());
  std::stable_sort(trace.begin(), trace.end(), [](const JobSpec& a, const JobSpec& b) {
    if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
    return a.id < b.id;
  });
  jobs_.reserve(trace.size());
  for (const auto& spec : trace) jobs_.emplace_back(spec);
  last_gpus_.resize(jobs_.size());
}

RoundRecord Simulator::run_round() {
  const double now = this->now();
  const double duration = config_.round_duration;
  RoundRecord record;
  record.index = round_;
  record.time = now;

  while (next_arrival_ < jobs_.size() && jobs_[next_arrival_].spec.arrival_time <= now) {
    jobs_[next_arrival_].state = JobState::queued;
    ++next_arrival_;
  }

  std::vector<const Job*> active;
  for (std::size_t i = 0; i < next_arrival_; ++i) {
    if (jobs_[i].active()) active.push_back(&jobs_[i]);
  }
  const auto order = scheduler::order_jobs(config_.scheduler, active, config_.las_threshold);

  // Who runs this round: walk the priority order and admit whatever fits.
  std::vector<char> selected(jobs_.size(), 0);
  const auto index_of = [&](const Job* j) { return static_cast<std::size_t>(j - jobs_.data()); };
  int capacity = cluster_.size();
  for (const Job* j : order) {
    if (j->spec.gpu_demand <= capacity) {
      selected[index_of(j)] = 1;
      capacity -= j->spec.gpu_demand;
    }
  }

  for (const Job* jp : order) {
    const auto i = index_of(jp);
    Job& job = jobs_[i];
    if (!job.allocation) continue;
    const bool preempt = !selected[i];
    if (!preempt && placement::apply_stickiness(job, placer_.stickiness()) == placement::StickyDecision::keep) continue;
    cluster_.release(job.allocation->gpu_ids, job.spec.id);
    last_gpus_[i] = job.allocation->gpu_ids;
    job.allocation.reset();
    if (preempt) {
      job.state = JobState::suspended;
      ++job.preemptions;
    }
  }

  const auto placement_order = placement::reorder_for_placement(order, cluster_.size());
  const auto started = std::chrono::steady_clock::now();
  for (const Job* jp : placement_order) {
    const auto i = index_of(jp);
    Job& job = jobs_[i];
    if (!selected[i] || job.allocation) continue;
    const placement::PlacementRequest request{job.spec.id, job.spec.job_class, job.spec.gpu_demand};
    const auto salt = static_cast<std::uint64_t>(round_) * 1000003ULL + static_cast<std::uint64_t>(job.spec.id) + 1;
    auto allocation = placer_.place(cluster_, request, salt);
    if (!allocation) {
      throw InvariantViolation(fmt::format("round {}: job {} ({} GPUs) was admitted but could not be placed with {} free",
                                           round_, job.spec.id, job.spec.gpu_demand, cluster_.free_count()));
    }
    ++record.placed_jobs;
    if (!last_gpus_[i].empty() && last_gpus_[i] != allocation->gpu_ids) ++job.migrations;
    last_gpus_[i] = allocation->gpu_ids;
    job.allocation = std::move(allocation);
    job.state = JobState::running;
    if (!job.start_time) job.start_time = now;
  }
  record.placement_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  check_conservation();

  std::vector<std::size_t> finishing;
  for (std::size_t i = 0; i < next_arrival_; ++i) {
    Job& job = jobs_[i];
    if (job.state == JobState::queued || job.state == JobState::suspended) ++record.queued_jobs;
    if (job.state != JobState::running) continue;
    ++record.running_jobs;
    const double iter_time = effective_iter_time(job, *job.allocation, profile_, config_);
    const double remaining = job.remaining_iterations();
    if (remaining * iter_time <= duration * (1.0 + 1e-12)) {
      job.finish_time = now + remaining * iter_time;
      job.completed_iterations = static_cast<double>(job.spec.total_iterations);
      finishing.push_back(i);
    } else {
      job.completed_iterations = std::min(job.completed_iterations + duration / iter_time,
                                          static_cast<double>(job.spec.total_iterations));
    }
    job.attained_service += duration * job.spec.gpu_demand;
  }
  record.gpus_in_use = cluster_.used_count();

  for (auto i : finishing) {
    Job& job = jobs_[i];
    cluster_.release(job.allocation->gpu_ids, job.spec.id);
    job.allocation.reset();
    job.state = JobState::finished;
    ++finished_;
  }

  rounds_.push_back(record);
  ++round_;
  return record;
}

void Simulator::check_conservation() const {
  int allocated = 0;
  for (std::size_t i = 0; i < next_arrival_; ++i) {
    const Job& job = jobs_[i];
    if (!job.allocation) {
      if (job.state == JobState::running) {
        throw InvariantViolation(fmt::format("job {} is running without GPUs", job.spec.id));
      }
      continue;
    }
    if (static_cast<int>(job.allocation->gpu_ids.size()) != job.spec.gpu_demand) {
      throw InvariantViolation(fmt::format("job {} holds {} GPUs, demands {}", job.spec.id,
                                           job.allocation->gpu_ids.size(), job.spec.gpu_demand));
    }
    for (auto g : job.allocation->gpu_ids) {
      if (cluster_.owner(g) != job.spec.id) {
        throw InvariantViolation(fmt::format("GPU {} is not owned by job {}", g, job.spec.id));
      }
    }
    allocated += job.spec.gpu_demand;
  }
  if (allocated != cluster_.used_count() || allocated > cluster_.size()) {
    throw InvariantViolation(fmt::format("round {}: {} GPUs allocated to jobs but {} marked in use", round_,
                                         allocated, cluster_.used_count()));
  }
}

SimResult Simulator::result() const {
  SimResult out;
  out.cluster_size = cluster_.size();
  out.rounds = rounds_;
  double first_arrival = 0.0;
  double last_finish = 0.0;
  bool any = false;
  for (const auto& job : jobs_) {
    if (job.state != JobState::finished) continue;
    JobRecord r;
    r.id = job.spec.id;
    r.gpu_demand = job.spec.gpu_demand;
    r.job_class = job.spec.job_class;
    r.arrival = job.spec.arrival_time;
    r.start = *job.start_time;
    r.finish = *job.finish_time;
    r.jct = r.finish - r.arrival;
    r.wait = r.start - r.arrival;
    r.migrations = job.migrations;
    r.preemptions = job.preemptions;
    first_arrival = any ? std::min(first_arrival, r.arrival) : r.arrival;
    last_finish = any ? std::max(last_finish, r.finish) : r.finish;
    any = true;
    out.jobs.push_back(r);
  }
  out.makespan = any ? last_finish - first_arrival : 0.0;
  return out;
}

SimResult run_sim(std::span<const JobSpec> trace, const VariabilityProfile& profile, const SimConfig& config) {
  config.validate();
  check_trace(trace, config.cluster_size(), profile.num_classes());
  Simulator sim(std::vector<JobSpec>(trace.begin(), trace.end()), fit_profile(profile, config), config);
  while (!sim.done()) sim.run_round();
  return sim.result();
}

OverheadStats measure_policy_overhead(std::span<const JobSpec> trace, const VariabilityProfile& profile,
                                      const SimConfig& config) {
  const auto result = run_sim(trace, profile, config);
  std::vector<double> samples;
  for (const auto& r : result.rounds) {
    if (r.placed_jobs > 0) samples.push_back(r.placement_seconds);
  }
  OverheadStats stats;
  stats.cluster_size = config.cluster_size();
  stats.rounds = samples.size();
  if (samples.empty()) return stats;
  std::sort(samples.begin(), samples.end());
  stats.min_seconds = samples.front();
  stats.max_seconds = samples.back();
  stats.median_seconds = variability::median(samples);
  return stats;
}

}  // namespace varsched::sim
