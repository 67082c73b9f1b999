#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "varsched/types.hpp"

namespace varsched::variability {

// Per-class normalized iteration times, one entry per GPU. Entries are
// strictly positive; a profile produced by normalize_profile() has median
// 1.0 in every class, while a sampled sub-profile keeps the source's scale.
class VariabilityProfile {
 public:
  VariabilityProfile() = default;
  explicit VariabilityProfile(std::vector<std::vector<double>> by_class);

  int num_classes() const { return static_cast<int>(by_class_.size()); }
  std::size_t num_gpus() const { return by_class_.empty() ? 0 : by_class_.front().size(); }

  std::span<const double> values(ClassIndex cls) const { return by_class_.at(static_cast<std::size_t>(cls)); }
  double value(ClassIndex cls, GpuId gpu) const {
    return by_class_.at(static_cast<std::size_t>(cls)).at(static_cast<std::size_t>(gpu));
  }

  friend bool operator==(const VariabilityProfile&, const VariabilityProfile&) = default;

 private:
  std::vector<std::vector<double>> by_class_;
};

double median(std::span<const double> values);

// Divides each class vector by its median. Throws std::invalid_argument on
// non-positive durations or empty class vectors.
VariabilityProfile normalize_profile(std::vector<std::vector<double>> raw);

// |z| > 3 using the population standard deviation of `values`.
std::vector<bool> outlier_mask(std::span<const double> values);

struct KSelection {
  int k = 1;
  // Set when fewer than 3 inliers (or fewer than 2 distinct inlier values)
  // remain, in which case a single bin is used.
  bool fallback = false;
  // silhouettes[i] belongs to k = i + 2.
  std::vector<double> silhouettes;
};

inline constexpr int kMinBins = 2;
inline constexpr int kMaxBins = 11;

// Sweeps k over [2, 11] on the >3-sigma inliers and keeps the best mean
// silhouette; ties go to the smaller k.
KSelection select_k(std::span<const double> values, std::uint64_t seed = 0);

struct ClassBinning {
  int k_inliers = 1;
  bool fallback = false;
  std::vector<double> bin_centroids;  // strictly ascending
  std::vector<double> gpu_scores;     // indexed by GpuId
  std::vector<int> gpu_bin;           // bin index, -1 for outliers
  std::vector<GpuId> outlier_gpus;    // ascending
  std::vector<double> silhouettes;

  // Sorted distinct scores actually carried by GPUs (bins plus outliers).
  std::vector<double> distinct_scores() const;
};

// Per-class PM-Scores as seen by the placement policies.
class PMBinning {
 public:
  PMBinning() = default;
  explicit PMBinning(std::vector<ClassBinning> classes) : classes_(std::move(classes)) {}

  // Every GPU carries its raw value as its own score (no binning).
  static PMBinning identity(const VariabilityProfile& profile);
  // Scores given directly; each distinct value becomes a bin.
  static PMBinning from_scores(std::vector<std::vector<double>> scores);

  int num_classes() const { return static_cast<int>(classes_.size()); }
  std::size_t num_gpus() const { return classes_.empty() ? 0 : classes_.front().gpu_scores.size(); }
  const ClassBinning& at(ClassIndex cls) const { return classes_.at(static_cast<std::size_t>(cls)); }
  std::span<const double> scores(ClassIndex cls) const { return at(cls).gpu_scores; }
  double score(ClassIndex cls, GpuId gpu) const {
    return at(cls).gpu_scores.at(static_cast<std::size_t>(gpu));
  }

  friend bool operator==(const PMBinning&, const PMBinning&) = default;

 private:
  std::vector<ClassBinning> classes_;
};

ClassBinning bin_class(std::span<const double> values, std::uint64_t seed);
PMBinning bin_pm_scores(const VariabilityProfile& profile, std::uint64_t seed);

// Draws n GPUs without replacement, keeping each GPU's per-class tuple
// together. No renormalization. Throws std::invalid_argument if n exceeds
// the source size.
VariabilityProfile sample_profile(const VariabilityProfile& source, std::size_t n, std::uint64_t seed);

// Synthetic profile generator. Every GPU has a latent power-management
// severity s (Gaussian around 0, or drawn from [tail_min - 1, tail_max - 1]
// for the tail fraction); class c sees 1 + sensitivity_c * s, times a
// lognormal per-class measurement jitter. Each class is then normalized to
// its median.
struct ProfileClassSpec {
  double sensitivity = 1.0;
  double jitter_sigma = 0.0;
};

struct ProfileSpec {
  std::size_t num_gpus = 256;
  double severity_sigma = 0.03;
  double tail_fraction = 0.0;
  double tail_min = 2.0;
  double tail_max = 3.5;
  std::vector<ProfileClassSpec> classes;
  std::uint64_t seed = 0;
};

VariabilityProfile synthesize_profile(const ProfileSpec& spec);

// Three classes: A heavily throttled with a 2-3.5x tail, B moderately
// sensitive, C nearly flat.
ProfileSpec heavy_tail_profile_spec(std::size_t num_gpus = 256, std::uint64_t seed = 0);

struct ProfileFile {
  VariabilityProfile profile;
  std::vector<NodeId> node_ids;  // per GPU, as listed in the file
};

// CSV with columns gpu_id,node_id,class,normalized_time (or raw_time_ms,
// normalized per class when `normalize_raw` is set). One row per (GPU, class);
// gpu ids must be dense 0..N-1 and every class must cover every GPU.
ProfileFile load_profile(const std::filesystem::path& path, bool normalize_raw = false);

void write_profile(const std::filesystem::path& path, const VariabilityProfile& profile,
                   int gpus_per_node);

}  // namespace varsched::variability
