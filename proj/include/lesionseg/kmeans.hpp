#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lesionseg/random.hpp"
#include "lesionseg/raster.hpp"

namespace lesionseg {

class InvalidK : public Error {
 public:
  using Error::Error;
};

struct KMeansOptions {
  std::uint64_t seed = 0;
  int max_iter = 100;
  double tol = 1e-4;  // relative objective improvement
};

template <std::size_t D>
struct KMeansResult {
  int k = 0;
  std::vector<std::array<double, D>> centroids;
  std::vector<int> labels;
  double objective = 0.0;
  std::vector<double> history;  // objective after seeding and after every iteration
  int iterations = 0;
};

template <std::size_t D>
double squared_distance(const std::array<double, D>& a, const std::array<double, D>& b) noexcept {
  double s = 0.0;
  for (std::size_t d = 0; d < D; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

namespace detail {

template <std::size_t D>
std::vector<std::array<double, D>> kmeanspp_seeds(std::span<const std::array<double, D>> points, int k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<std::array<double, D>> seeds;
  seeds.reserve(static_cast<std::size_t>(k));
  seeds.push_back(points[uniform_index(rng, n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], seeds[0]);
  // Greedy variant: draw several D^2 candidates per centre and keep the one
  // that lowers the potential most.
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  std::vector<double> trial_d2(n), best_d2(n);
  while (static_cast<int>(seeds.size()) < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t best_pick = n;
    double best_potential = 0.0;
    for (int t = 0; t < trials; ++t) {
      std::size_t pick = 0;
      if (total > 0.0) {
        const double target = uniform01(rng) * total;
        double acc = 0.0;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc > target && d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
        // Rounding can leave target at or beyond the final sum.
        if (pick == n)
          for (std::size_t i = n; i-- > 0;)
            if (d2[i] > 0.0) {
              pick = i;
              break;
            }
      } else {
        pick = uniform_index(rng, n);
      }
      double potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial_d2[i] = std::min(d2[i], squared_distance(points[i], points[pick]));
        potential += trial_d2[i];
      }
      if (best_pick == n || potential < best_potential) {
        best_pick = pick;
        best_potential = potential;
        best_d2.swap(trial_d2);
      }
    }
    seeds.push_back(points[best_pick]);
    d2.swap(best_d2);
  }
  return seeds;
}

// Nearest-centroid assignment, ties to the lowest index. Returns the objective.
template <std::size_t D>
double assign(std::span<const std::array<double, D>> points, const std::vector<std::array<double, D>>& centroids,
              std::vector<int>& labels, std::vector<double>& d2) {
  double objective = 0.0;
  const int k = static_cast<int>(centroids.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    int best = 0;
    double best_d = squared_distance(points[i], centroids[0]);
    for (int j = 1; j < k; ++j) {
      const double d = squared_distance(points[i], centroids[static_cast<std::size_t>(j)]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    labels[i] = best;
    d2[i] = best_d;
    objective += best_d;
  }
  return objective;
}

// Moves every non-empty centroid to the mean of its points. Empty clusters are
// reseeded to the point currently farthest from its own centroid. Returns
// false if some cluster was empty.
template <std::size_t D>
bool update_centroids(std::span<const std::array<double, D>> points, std::vector<int>& labels,
                      std::vector<double>& d2, std::vector<std::array<double, D>>& centroids) {
  const std::size_t k = centroids.size();
  std::vector<std::array<double, D>> sums(k, std::array<double, D>{});
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto j = static_cast<std::size_t>(labels[i]);
    for (std::size_t d = 0; d < D; ++d) sums[j][d] += points[i][d];
    ++counts[j];
  }
  bool all_filled = true;
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    for (std::size_t d = 0; d < D; ++d) centroids[j][d] = sums[j][d] / static_cast<double>(counts[j]);
  }
  std::vector<std::size_t> taken;
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] != 0) continue;
    all_filled = false;
    std::size_t far = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (far < points.size() && !(d2[i] > d2[far])) continue;
      if (std::find(taken.begin(), taken.end(), i) != taken.end()) continue;
      far = i;
    }
    taken.push_back(far);
    centroids[j] = points[far];
    --counts[static_cast<std::size_t>(labels[far])];
    labels[far] = static_cast<int>(j);
    counts[j] = 1;
    d2[far] = 0.0;
  }
  return all_filled;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding. Deterministic for a given
/// (points, k, seed); the objective never increases between iterations.
template <std::size_t D>
KMeansResult<D> kmeans(std::span<const std::array<double, D>> points, int k, const KMeansOptions& opts = {}) {
  const std::size_t n = points.size();
  if (k < 1 || n == 0 || static_cast<std::size_t>(k) > n)
    throw InvalidK("kmeans: k must be in [1, N], got k=" + std::to_string(k) + " N=" + std::to_string(n));

  Rng rng(derive_seed(opts.seed, 0x6b6d65616e73ULL));
  KMeansResult<D> res;
  res.k = k;
  res.centroids = detail::kmeanspp_seeds(points, k, rng);
  res.labels.assign(n, 0);
  std::vector<double> d2(n);
  double objective = detail::assign(points, res.centroids, res.labels, d2);
  res.history.push_back(objective);

  std::vector<int> previous;
  bool settled = false;
  for (int it = 0; it < opts.max_iter; ++it) {
    previous = res.labels;
    const bool filled = detail::update_centroids(points, res.labels, d2, res.centroids);
    const double next = detail::assign(points, res.centroids, res.labels, d2);
    res.history.push_back(next);
    res.iterations = it + 1;
    const double gain = objective - next;
    objective = next;
    if (filled && res.labels == previous) {
      settled = true;  // centroids are already the means of their clusters
      break;
    }
    if (objective == 0.0 || gain < opts.tol * (objective + gain)) break;
  }

  if (!settled) {
    // Leave every non-empty centroid at the mean of the final assignment.
    std::vector<std::array<double, D>> sums(static_cast<std::size_t>(k), std::array<double, D>{});
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(res.labels[i]);
      for (std::size_t d = 0; d < D; ++d) sums[j][d] += points[i][d];
      ++counts[j];
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j)
      if (counts[j] > 0)
        for (std::size_t d = 0; d < D; ++d) res.centroids[j][d] = sums[j][d] / static_cast<double>(counts[j]);
    double refined = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      refined += squared_distance(points[i], res.centroids[static_cast<std::size_t>(res.labels[i])]);
    if (refined < objective) res.history.push_back(refined);
    objective = refined;
  }
  res.objective = objective;
  return res;
}

template <std::size_t D>
KMeansResult<D> kmeans(const std::vector<std::array<double, D>>& points, int k, const KMeansOptions& opts = {}) {
  return kmeans(std::span<const std::array<double, D>>(points), k, opts);
}

}  // namespace lesionseg
