#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace varsched::numeric {

// Row-major set of points with a fixed dimension (1 or 2 in practice).
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t dim, std::vector<double> coords);

  static PointSet from_1d(std::span<const double> values);
  static PointSet from_2d(std::span<const std::array<double, 2>> points);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const { return size() == 0; }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> mutable_point(std::size_t i) {
    return {coords_.data() + i * dim_, dim_};
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

struct KMeansOptions {
  int max_iterations = 300;
  // Independent k-means++ restarts; the lowest-inertia run is kept.
  int restarts = 10;
};

struct KMeansResult {
  // Sorted ascending by first coordinate; assignments are relabeled to match.
  PointSet centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  int iterations = 0;
  // Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_history;
};

// Lloyd's algorithm with k-means++ seeding. Nearest-centroid ties go to the
// lowest centroid index. Deterministic for a fixed (points, k, seed).
// Throws std::invalid_argument for empty input or k outside [1, |points|].
KMeansResult kmeans(const PointSet& points, int k, std::uint64_t seed,
                    const KMeansOptions& options = {});

// Mean silhouette coefficient. Cluster labels must cover 0..K-1 with K >= 2
// and no empty label; singleton clusters contribute 0.
double silhouette_score(const PointSet& points, std::span<const int> assignments);

// Index of the nearest centroid, ties to the lower index.
int nearest_centroid(const PointSet& centroids, std::span<const double> point);

}  // namespace varsched::numeric
