#include "varsched/variability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "varsched/csv.hpp"
#include "varsched/numeric.hpp"
#include "varsched/rng.hpp"

namespace varsched::variability {

VariabilityProfile::VariabilityProfile(std::vector<std::vector<double>> by_class)
    : by_class_(std::move(by_class)) {
  if (by_class_.empty()) return;
  const auto n = by_class_.front().size();
  for (std::size_t c = 0; c < by_class_.size(); ++c) {
    if (by_class_[c].size() != n) {
      throw std::invalid_argument(fmt::format(
          "VariabilityProfile: class {} has {} GPUs, expected {}", class_label(static_cast<int>(c)),
          by_class_[c].size(), n));
    }
    for (double v : by_class_[c]) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("VariabilityProfile: entries must be positive and finite");
      }
    }
  }
}

double median(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

VariabilityProfile normalize_profile(std::vector<std::vector<double>> raw) {
  for (std::size_t c = 0; c < raw.size(); ++c) {
    auto& vec = raw[c];
    if (vec.empty()) {
      throw std::invalid_argument(
          fmt::format("normalize_profile: class {} is empty", class_label(static_cast<int>(c))));
    }
    for (double v : vec) {
      if (!(v > 0.0)) {
        throw std::invalid_argument(fmt::format(
            "normalize_profile: class {} has non-positive duration {}", class_label(static_cast<int>(c)), v));
      }
    }
    const double m = median(vec);
    for (double& v : vec) v /= m;
  }
  return VariabilityProfile(std::move(raw));
}

std::vector<bool> outlier_mask(std::span<const double> values) {
  std::vector<bool> mask(values.size(), false);
  if (values.empty()) return mask;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sigma = std::sqrt(ss / n);
  if (sigma <= 0.0) return mask;
  for (std::size_t i = 0; i < values.size(); ++i) {
    mask[i] = std::abs(values[i] - mean) > 3.0 * sigma;
  }
  return mask;
}

namespace {

std::vector<double> inliers_of(std::span<const double> values, const std::vector<bool>& mask) {
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) out.push_back(values[i]);
  }
  return out;
}

std::size_t distinct_count(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace

KSelection select_k(std::span<const double> values, std::uint64_t seed) {
  KSelection sel;
  const auto inliers = inliers_of(values, outlier_mask(values));
  const auto distinct = distinct_count(inliers);
  const auto cap = std::min<std::size_t>({static_cast<std::size_t>(kMaxBins),
                                          inliers.empty() ? 0 : inliers.size() - 1, distinct});
  if (inliers.size() < 3 || cap < static_cast<std::size_t>(kMinBins)) {
    sel.k = 1;
    sel.fallback = true;
    return sel;
  }

  const auto points = numeric::PointSet::from_1d(inliers);
  double best = -2.0;
  for (int k = kMinBins; k <= static_cast<int>(cap); ++k) {
    const auto km = numeric::kmeans(points, k, seed);
    // Empty clusters would break the silhouette; compact the labels first.
    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    std::vector<int> labels(km.assignments.size());
    int next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto& slot = remap[static_cast<std::size_t>(km.assignments[i])];
      if (slot < 0) slot = next++;
      labels[i] = slot;
    }
    const double s = next >= 2 ? numeric::silhouette_score(points, labels) : -1.0;
    sel.silhouettes.push_back(s);
    if (s > best) {
      best = s;
      sel.k = k;
    }
  }
  return sel;
}

std::vector<double> ClassBinning::distinct_scores() const {
  std::vector<double> v = gpu_scores;
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

ClassBinning bin_class(std::span<const double> values, std::uint64_t seed) {
  ClassBinning out;
  const auto mask = outlier_mask(values);
  const auto sel = select_k(values, seed);
  out.fallback = sel.fallback;
  out.silhouettes = sel.silhouettes;

  std::vector<std::size_t> inlier_idx;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) inlier_idx.push_back(i);
  }
  std::vector<double> inliers;
  inliers.reserve(inlier_idx.size());
  for (auto i : inlier_idx) inliers.push_back(values[i]);

  out.gpu_scores.assign(values.size(), 0.0);
  out.gpu_bin.assign(values.size(), -1);

  if (!inliers.empty()) {
    std::vector<int> labels(inliers.size(), 0);
    std::vector<double> centroids;
    if (sel.k <= 1) {
      centroids.push_back(std::accumulate(inliers.begin(), inliers.end(), 0.0) /
                          static_cast<double>(inliers.size()));
    } else {
      const auto km = numeric::kmeans(numeric::PointSet::from_1d(inliers), sel.k, seed);
      labels = km.assignments;
      for (std::size_t c = 0; c < km.centroids.size(); ++c) centroids.push_back(km.centroids[c][0]);
    }
    // Drop clusters that ended up empty; remaining centroids stay ascending.
    std::vector<std::size_t> members(centroids.size(), 0);
    for (int l : labels) ++members[static_cast<std::size_t>(l)];
    std::vector<int> remap(centroids.size(), -1);
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (members[c] == 0) continue;
      remap[c] = static_cast<int>(out.bin_centroids.size());
      out.bin_centroids.push_back(centroids[c]);
    }
    for (std::size_t j = 0; j < inlier_idx.size(); ++j) {
      const int bin = remap[static_cast<std::size_t>(labels[j])];
      out.gpu_bin[inlier_idx[j]] = bin;
      out.gpu_scores[inlier_idx[j]] = out.bin_centroids[static_cast<std::size_t>(bin)];
    }
  }
  out.k_inliers = static_cast<int>(out.bin_centroids.size());

  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) continue;
    out.outlier_gpus.push_back(static_cast<GpuId>(i));
    out.gpu_scores[i] = values[i];
  }
  return out;
}

PMBinning bin_pm_scores(const VariabilityProfile& profile, std::uint64_t seed) {
  std::vector<ClassBinning> classes;
  for (int c = 0; c < profile.num_classes(); ++c) {
    classes.push_back(bin_class(profile.values(c), seed));
  }
  return PMBinning(std::move(classes));
}

PMBinning PMBinning::from_scores(std::vector<std::vector<double>> scores) {
  std::vector<ClassBinning> classes;
  for (auto& s : scores) {
    ClassBinning cb;
    cb.bin_centroids = s;
    std::sort(cb.bin_centroids.begin(), cb.bin_centroids.end());
    cb.bin_centroids.erase(std::unique(cb.bin_centroids.begin(), cb.bin_centroids.end()),
                           cb.bin_centroids.end());
    cb.k_inliers = static_cast<int>(cb.bin_centroids.size());
    cb.gpu_bin.reserve(s.size());
    for (double v : s) {
      const auto it = std::lower_bound(cb.bin_centroids.begin(), cb.bin_centroids.end(), v);
      cb.gpu_bin.push_back(static_cast<int>(it - cb.bin_centroids.begin()));
    }
    cb.gpu_scores = std::move(s);
    classes.push_back(std::move(cb));
  }
  return PMBinning(std::move(classes));
}

PMBinning PMBinning::identity(const VariabilityProfile& profile) {
  std::vector<std::vector<double>> scores;
  for (int c = 0; c < profile.num_classes(); ++c) {
    const auto v = profile.values(c);
    scores.emplace_back(v.begin(), v.end());
  }
  return from_scores(std::move(scores));
}

VariabilityProfile sample_profile(const VariabilityProfile& source, std::size_t n, std::uint64_t seed) {
  const std::size_t m = source.num_gpus();
  if (n > m) {
    throw std::invalid_argument(
        fmt::format("sample_profile: cannot draw {} GPUs from a {}-GPU profile", n, m));
  }
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = make_rng(seed, 0x5a3f1e);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, m - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<std::vector<double>> out(static_cast<std::size_t>(source.num_classes()));
  for (int c = 0; c < source.num_classes(); ++c) {
    auto& dst = out[static_cast<std::size_t>(c)];
    dst.reserve(n);
    for (std::size_t i = 0; i < n; ++i) dst.push_back(source.value(c, static_cast<GpuId>(idx[i])));
  }
  return VariabilityProfile(std::move(out));
}

VariabilityProfile synthesize_profile(const ProfileSpec& spec) {
  if (spec.num_gpus == 0 || spec.classes.empty()) {
    throw std::invalid_argument("synthesize_profile: need at least one GPU and one class");
  }
  if (spec.tail_fraction < 0.0 || spec.tail_fraction > 1.0 || spec.tail_min > spec.tail_max) {
    throw std::invalid_argument("synthesize_profile: invalid tail parameters");
  }
  auto rng = make_rng(spec.seed, 0x9f0f11e);
  std::bernoulli_distribution in_tail(spec.tail_fraction);
  std::normal_distribution<double> body(0.0, spec.severity_sigma);
  std::uniform_real_distribution<double> tail(spec.tail_min - 1.0, spec.tail_max - 1.0);

  std::vector<double> severity(spec.num_gpus);
  for (auto& s : severity) s = in_tail(rng) ? tail(rng) : body(rng);

  std::vector<std::vector<double>> raw;
  for (const auto& cls : spec.classes) {
    std::normal_distribution<double> jitter(0.0, cls.jitter_sigma);
    std::vector<double> v;
    v.reserve(spec.num_gpus);
    for (double s : severity) {
      const double slowdown = std::max(0.05, 1.0 + cls.sensitivity * s);
      v.push_back(slowdown * std::exp(cls.jitter_sigma > 0.0 ? jitter(rng) : 0.0));
    }
    raw.push_back(std::move(v));
  }
  return normalize_profile(std::move(raw));
}

ProfileSpec heavy_tail_profile_spec(std::size_t num_gpus, std::uint64_t seed) {
  ProfileSpec spec;
  spec.num_gpus = num_gpus;
  spec.severity_sigma = 0.04;
  spec.tail_fraction = 0.05;
  spec.tail_min = 2.0;
  spec.tail_max = 3.5;
  spec.classes = {{1.0, 0.02}, {0.4, 0.015}, {0.1, 0.01}};
  spec.seed = seed;
  return spec;
}

ProfileFile load_profile(const std::filesystem::path& path, bool normalize_raw) {
  const auto src = path.string();
  const auto table = csv::read_file(path);
  const auto c_gpu = table.column("gpu_id", src);
  const auto c_node = table.column("node_id", src);
  const auto c_class = table.column("class", src);
  const auto c_value = table.column(normalize_raw ? "raw_time_ms" : "normalized_time", src);

  std::map<int, std::map<int, double>> by_class;
  std::map<int, int> node_of;
  for (const auto& row : table.rows) {
    const auto gpu = csv::to_int(row.fields[c_gpu], src, row.line, "gpu_id");
    const auto node = csv::to_int(row.fields[c_node], src, row.line, "node_id");
    const double value = csv::to_double(row.fields[c_value], src, row.line, table.header[c_value]);
    ClassIndex cls = 0;
    try {
      cls = parse_class(row.fields[c_class]);
    } catch (const std::invalid_argument& e) {
      throw LoadError(fmt::format("{}:{}: {}", src, row.line, e.what()));
    }
    if (gpu < 0 || node < 0) throw LoadError(fmt::format("{}:{}: negative id", src, row.line));
    if (!(value > 0.0)) {
      throw LoadError(fmt::format("{}:{}: {} must be positive", src, row.line, table.header[c_value]));
    }
    const auto [it, fresh] = node_of.emplace(static_cast<int>(gpu), static_cast<int>(node));
    if (!fresh && it->second != node) {
      throw LoadError(fmt::format("{}:{}: gpu {} listed on two nodes", src, row.line, gpu));
    }
    if (!by_class[cls].emplace(static_cast<int>(gpu), value).second) {
      throw LoadError(fmt::format("{}:{}: duplicate row for gpu {} class {}", src, row.line, gpu,
                                  class_label(cls)));
    }
  }
  if (by_class.empty()) throw LoadError(fmt::format("{}: no profile rows", src));

  const auto num_gpus = node_of.size();
  if (node_of.rbegin()->first != static_cast<int>(num_gpus) - 1) {
    throw LoadError(fmt::format("{}: gpu ids must be dense from 0", src));
  }
  const int num_classes = by_class.rbegin()->first + 1;
  std::vector<std::vector<double>> values(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    const auto it = by_class.find(c);
    if (it == by_class.end() || it->second.size() != num_gpus) {
      throw LoadError(fmt::format("{}: class {} does not cover all {} GPUs", src, class_label(c), num_gpus));
    }
    for (const auto& [gpu, v] : it->second) values[static_cast<std::size_t>(c)].push_back(v);
  }

  ProfileFile out;
  out.profile = normalize_raw ? normalize_profile(std::move(values)) : VariabilityProfile(std::move(values));
  for (const auto& [gpu, node] : node_of) out.node_ids.push_back(node);
  return out;
}

void write_profile(const std::filesystem::path& path, const VariabilityProfile& profile,
                   int gpus_per_node) {
  if (gpus_per_node < 1) throw std::invalid_argument("write_profile: gpus_per_node must be positive");
  std::string text = "gpu_id,node_id,class,normalized_time\n";
  for (std::size_t g = 0; g < profile.num_gpus(); ++g) {
    for (int c = 0; c < profile.num_classes(); ++c) {
      text += fmt::format("{},{},{},{}\n", g, static_cast<int>(g) / gpus_per_node, class_label(c),
                          profile.value(c, static_cast<GpuId>(g)));
    }
  }
  csv::write_atomically(path, text);
}

}  // namespace varsched::variability
