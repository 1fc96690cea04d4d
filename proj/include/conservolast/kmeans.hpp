#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "conservolast/types.hpp"

namespace conservolast {

struct KMeansResult {
  std::vector<Vec3> centroids;
  std::vector<int> assignment;
  double within_ss = 0.0;
  int iterations = 0;
};

/// Lloyd iteration with k-means++ seeding. Deterministic for a given seed.
/// Stops when assignments no longer change or after max_rounds. With
/// restarts > 1 the run with the lowest within-cluster sum of squares wins.
/// Throws InputError if k is zero or exceeds the number of distinct points.
KMeansResult kmeans(std::span<const Vec3> points, int k, std::uint64_t seed, int restarts = 1, int max_rounds = 200);

/// Number of distinct points (exact comparison).
std::size_t count_distinct(std::span<const Vec3> points);

double within_cluster_ss(std::span<const Vec3> points, std::span<const Vec3> centroids);

}  // namespace conservolast
