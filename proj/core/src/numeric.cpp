#include "varsched/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "varsched/rng.hpp"

namespace varsched::numeric {

PointSet::PointSet(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw std::invalid_argument("PointSet: dimension must be positive");
  if (coords_.size() % dim_ != 0) {
    throw std::invalid_argument("PointSet: coordinate count is not a multiple of dimension");
  }
}

PointSet PointSet::from_1d(std::span<const double> values) {
  return PointSet(1, std::vector<double>(values.begin(), values.end()));
}

PointSet PointSet::from_2d(std::span<const std::array<double, 2>> points) {
  std::vector<double> coords;
  coords.reserve(points.size() * 2);
  for (const auto& p : points) {
    coords.push_back(p[0]);
    coords.push_back(p[1]);
  }
  return PointSet(2, std::move(coords));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return sum;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

int nearest_centroid(const PointSet& centroids, std::span<const double> point) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(point, centroids[c]);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

namespace {

struct LloydRun {
  PointSet centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

PointSet seed_plus_plus(const PointSet& points, int k, std::mt19937_64& rng) {
  const std::size_t n = points.size();
  const std::size_t dim = points.dim();
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(k) * dim);

  auto push = [&](std::size_t idx) {
    const auto p = points[idx];
    coords.insert(coords.end(), p.begin(), p.end());
  };

  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  push(first(rng));

  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    const std::span<const double> last{coords.data() + (c - 1) * dim, dim};
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], last));
      total += d2[i];
    }
    if (total <= 0.0) {
      // Every point coincides with a chosen centre; duplicate the first point.
      push(0);
      continue;
    }
    std::discrete_distribution<std::size_t> pick(d2.begin(), d2.end());
    push(pick(rng));
  }
  return PointSet(dim, std::move(coords));
}

// Returns true if any assignment changed.
bool assign(const PointSet& points, const PointSet& centroids, std::vector<int>& assignments,
            double& inertia) {
  bool changed = false;
  inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = nearest_centroid(centroids, points[i]);
    inertia += squared_distance(points[i], centroids[static_cast<std::size_t>(c)]);
    if (assignments[i] != c) {
      assignments[i] = c;
      changed = true;
    }
  }
  return changed;
}

void update(const PointSet& points, PointSet& centroids, const std::vector<int>& assignments) {
  const std::size_t k = centroids.size();
  const std::size_t dim = points.dim();
  std::vector<double> sums(k * dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = static_cast<std::size_t>(assignments[i]);
    ++counts[c];
    const auto p = points[i];
    for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += p[d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    auto centre = centroids.mutable_point(c);
    for (std::size_t d = 0; d < dim; ++d) {
      centre[d] = sums[c * dim + d] / static_cast<double>(counts[c]);
    }
  }
  // An empty cluster takes over the point farthest from its current centre.
  std::vector<bool> taken(points.size(), false);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (taken[i]) continue;
      const double d = squared_distance(
          points[i], centroids[static_cast<std::size_t>(assignments[i])]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far_d <= 0.0) continue;
    taken[far] = true;
    auto centre = centroids.mutable_point(c);
    const auto p = points[far];
    std::copy(p.begin(), p.end(), centre.begin());
    counts[c] = 1;
  }
}

LloydRun lloyd(const PointSet& points, int k, std::mt19937_64& rng, int max_iterations) {
  LloydRun run;
  run.centroids = seed_plus_plus(points, k, rng);
  run.assignments.assign(points.size(), -1);
  assign(points, run.centroids, run.assignments, run.inertia);
  run.history.push_back(run.inertia);
  for (int it = 1; it <= max_iterations; ++it) {
    update(points, run.centroids, run.assignments);
    const bool changed = assign(points, run.centroids, run.assignments, run.inertia);
    run.history.push_back(run.inertia);
    run.iterations = it;
    if (!changed) break;
  }
  return run;
}

}  // namespace

KMeansResult kmeans(const PointSet& points, int k, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (points.empty()) throw std::invalid_argument("kmeans: empty input");
  if (k < 1) throw std::invalid_argument("kmeans: k must be at least 1");
  if (static_cast<std::size_t>(k) > points.size()) {
    throw std::invalid_argument("kmeans: k exceeds the number of points");
  }

  const int restarts = std::max(1, options.restarts);
  LloydRun best;
  bool have_best = false;
  for (int r = 0; r < restarts; ++r) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(r));
    LloydRun run = lloyd(points, k, rng, options.max_iterations);
    if (!have_best || run.inertia < best.inertia) {
      best = std::move(run);
      have_best = true;
    }
  }

  // Order centroids ascending by first coordinate (then remaining coordinates).
  const std::size_t dim = points.dim();
  std::vector<std::size_t> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto pa = best.centroids[a];
    const auto pb = best.centroids[b];
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  });
  std::vector<int> relabel(static_cast<std::size_t>(k));
  std::vector<double> sorted;
  sorted.reserve(static_cast<std::size_t>(k) * dim);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    relabel[order[pos]] = static_cast<int>(pos);
    const auto p = best.centroids[order[pos]];
    sorted.insert(sorted.end(), p.begin(), p.end());
  }

  KMeansResult result;
  result.centroids = PointSet(dim, std::move(sorted));
  result.assignments.reserve(points.size());
  for (int a : best.assignments) result.assignments.push_back(relabel[static_cast<std::size_t>(a)]);
  result.inertia = best.inertia;
  result.iterations = best.iterations;
  result.inertia_history = std::move(best.history);
  return result;
}

double silhouette_score(const PointSet& points, std::span<const int> assignments) {
  const std::size_t n = points.size();
  if (assignments.size() != n) {
    throw std::invalid_argument("silhouette_score: assignment count does not match points");
  }
  if (n < 3) throw std::invalid_argument("silhouette_score: need at least 3 points");

  int max_label = -1;
  for (int a : assignments) {
    if (a < 0) throw std::invalid_argument("silhouette_score: negative cluster label");
    max_label = std::max(max_label, a);
  }
  const auto clusters = static_cast<std::size_t>(max_label) + 1;
  if (clusters < 2) throw std::invalid_argument("silhouette_score: need at least 2 clusters");
  std::vector<std::size_t> sizes(clusters, 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  if (std::find(sizes.begin(), sizes.end(), 0u) != sizes.end()) {
    throw std::invalid_argument("silhouette_score: empty cluster");
  }

  std::vector<double> sums(clusters);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(assignments[i]);
    if (sizes[own] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(assignments[j])] += distance(points[i], points[j]);
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < clusters; ++c) {
      if (c == own) continue;
      b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

}  // namespace varsched::numeric
