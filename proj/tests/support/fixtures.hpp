#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "varsched/cluster.hpp"
#include "varsched/job.hpp"

namespace fixtures {

// lo + (hi - lo) * i / (n - 1), i = 0..n-1.
inline std::vector<double> lin(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return v;
}

inline void append(std::vector<double>& dst, const std::vector<double>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

// 128 class-A times shaped like a measured cluster: most GPUs near the
// median, a fast group, two slow groups and a few badly throttled ones.
inline std::vector<double> fig5_like_raw() {
  std::vector<double> v;
  append(v, lin(0.900, 0.915, 20));
  append(v, lin(0.970, 1.000, 60));
  append(v, lin(1.040, 1.055, 28));
  append(v, lin(1.095, 1.110, 16));
  append(v, lin(2.55, 2.65, 4));
  return v;
}

// Three tight bins and one throttled GPU; the median is exactly 1.0.
inline std::vector<double> four_bin_profile() {
  std::vector<double> v;
  v.insert(v.end(), 14, 0.89);
  v.insert(v.end(), 18, 0.94);
  v.insert(v.end(), 31, 1.06);
  v.push_back(2.55);
  return v;
}

inline varsched::JobSpec job(varsched::JobId id, double arrival, int demand, int cls = 0,
                             std::int64_t iterations = 100, double base = 1.0) {
  varsched::JobSpec s;
  s.id = id;
  s.arrival_time = arrival;
  s.gpu_demand = demand;
  s.job_class = cls;
  s.total_iterations = iterations;
  s.base_iter_time = base;
  return s;
}

// Smallest locality-factor x max-score over every demand-sized subset of
// free GPUs, by brute force.
inline double exhaustive_min_lv(const varsched::ClusterState& state, int demand,
                                const std::vector<double>& scores, double l_across) {
  const auto free = state.free_gpus();
  const auto n = free.size();
  double best = std::numeric_limits<double>::infinity();
  if (n < static_cast<std::size_t>(demand) || n > 30) return best;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != demand) continue;
    double worst = 0.0;
    int first_node = -1;
    bool spans = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) continue;
      const auto g = free[i];
      worst = std::max(worst, scores[static_cast<std::size_t>(g)]);
      const int node = state.node_of(g);
      if (first_node < 0) first_node = node;
      else if (node != first_node) spans = true;
    }
    best = std::min(best, (spans ? l_across : 1.0) * worst);
  }
  return best;
}

// Random cluster occupancy and binned scores drawn from a few levels.
struct RandomInstance {
  varsched::ClusterState state{1, 1};
  std::vector<double> scores;
  int demand = 1;
};

inline RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nodes_d(1, 4);
  std::uniform_int_distribution<int> gpn_d(1, 4);
  const int nodes = nodes_d(rng);
  const int gpn = gpn_d(rng);
  RandomInstance inst{varsched::ClusterState(nodes, gpn), {}, 1};
  const std::vector<double> levels = {0.85, 0.9, 0.97, 1.0, 1.06, 1.2, 1.5, 2.1, 2.55, 3.4};
  std::uniform_int_distribution<std::size_t> nlevels_d(1, 5);
  std::vector<double> palette;
  std::sample(levels.begin(), levels.end(), std::back_inserter(palette), nlevels_d(rng), rng);
  std::uniform_int_distribution<std::size_t> pick(0, palette.size() - 1);
  for (int g = 0; g < nodes * gpn; ++g) inst.scores.push_back(palette[pick(rng)]);
  std::bernoulli_distribution busy(0.3);
  std::vector<varsched::GpuId> taken;
  for (int g = 0; g < nodes * gpn; ++g) {
    if (busy(rng)) taken.push_back(g);
  }
  if (!taken.empty()) inst.state.mark_in_use(taken, 999);
  const int cap = std::min(gpn, inst.state.free_count());
  if (cap >= 1) {
    std::uniform_int_distribution<int> demand_d(1, cap);
    inst.demand = demand_d(rng);
  } else {
    inst.demand = 1;
  }
  return inst;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("varsched-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& contents) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << contents;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixtures
