#include "conservolast/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>

#include "conservolast/errors.hpp"

namespace conservolast {

namespace {

int nearest(const Vec3& p, std::span<const Vec3> centroids, double* dist2 = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = (p - centroids[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

std::vector<Vec3> seed_plus_plus(std::span<const Vec3> points, int k, std::mt19937_64& rng) {
  const std::size_t n = points.size();
  std::vector<Vec3> centroids;
  centroids.reserve(k);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centroids.push_back(points[first(rng)]);

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (points[i] - centroids[0]).squaredNorm();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Rounding can leave target >= 0 after the loop; fall back to the last
      // point with positive weight.
      if (d2[pick] == 0.0) {
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points[i] - centroids.back()).squaredNorm());
  }
  return centroids;
}

KMeansResult lloyd(std::span<const Vec3> points, std::vector<Vec3> centroids, int max_rounds) {
  const std::size_t n = points.size();
  const int k = static_cast<int>(centroids.size());
  KMeansResult res;
  res.assignment.assign(n, -1);
  for (int round = 0; round < max_rounds; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest(points[i], centroids);
      if (c != res.assignment[i]) {
        res.assignment[i] = c;
        changed = true;
      }
    }
    res.iterations = round + 1;
    if (!changed) break;

    std::vector<Vec3> sums(k, Vec3::Zero());
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[res.assignment[i]] += points[i];
      ++counts[res.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids[c] = sums[c] / counts[c];
        continue;
      }
      // Empty cluster: move it to the point farthest from its centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (points[i] - centroids[res.assignment[i]]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids[c] = points[far];
      res.assignment[far] = c;
    }
  }
  res.centroids = std::move(centroids);
  res.within_ss = within_cluster_ss(points, res.centroids);
  return res;
}

}  // namespace

std::size_t count_distinct(std::span<const Vec3> points) {
  std::vector<std::array<double, 3>> keys;
  keys.reserve(points.size());
  for (const Vec3& p : points) keys.push_back({p[0], p[1], p[2]});
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

double within_cluster_ss(std::span<const Vec3> points, std::span<const Vec3> centroids) {
  double total = 0.0;
  for (const Vec3& p : points) {
    double d2 = 0.0;
    nearest(p, centroids, &d2);
    total += d2;
  }
  return total;
}

KMeansResult kmeans(std::span<const Vec3> points, int k, std::uint64_t seed, int restarts, int max_rounds) {
  if (k <= 0) throw InputError("kmeans: k must be positive");
  const std::size_t distinct = count_distinct(points);
  if (static_cast<std::size_t>(k) > distinct) {
    throw InputError("kmeans: k = " + std::to_string(k) + " exceeds the " + std::to_string(distinct) +
                     " distinct points");
  }
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.within_ss = std::numeric_limits<double>::infinity();
  for (int run = 0; run < std::max(1, restarts); ++run) {
    KMeansResult res = lloyd(points, seed_plus_plus(points, k, rng), max_rounds);
    if (res.within_ss < best.within_ss) best = std::move(res);
  }
  return best;
}

}  // namespace conservolast
