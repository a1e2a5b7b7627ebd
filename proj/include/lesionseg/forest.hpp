#pragma once

// Random forest regressor: bagged variance-minimizing regression trees with
// per-node random feature subsets.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "lesionseg/features.hpp"
#include "lesionseg/random.hpp"

namespace lesionseg {

class NoSamples : public DataError {
 public:
  using DataError::DataError;
};

struct TrainingSample {
  FeatureVector features{};
  double target = 0.0;  // Jaccard index against ground truth
};

/// Leaf when feature < 0. Samples with x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(const FeatureVector& x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                                        : nodes[i].right);
    return nodes[i].value;
  }

  bool operator==(const RegressionTree&) const = default;
};

struct ForestOptions {
  int n_trees = 50;
  int mtry = 4;                    // ceil(10 / 3)
  std::size_t min_node_size = 5;  // nodes with fewer samples become leaves
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  std::uint64_t seed = 0;

  bool operator==(const ForestModel&) const = default;
};

/// Bootstrap draw (n with replacement) used for tree `tree`.
inline std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, int tree) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(tree)));
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = uniform_index(rng, n);
  return idx;
}

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(std::span<const TrainingSample> samples, const ForestOptions& opts, Rng& rng)
      : samples_(samples), opts_(opts), rng_(rng) {}

  RegressionTree build(std::vector<std::size_t> indices) {
    RegressionTree tree;
    grow(tree, indices);
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double sse = 0.0;
  };

  int grow(RegressionTree& tree, std::vector<std::size_t>& idx) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    // Offsetting by the first target makes the mean exact for constant targets.
    const double base = samples_[idx[0]].target;
    double sum = 0.0;
    for (std::size_t i : idx) sum += samples_[i].target - base;
    const double mean = base + sum / static_cast<double>(idx.size());
    tree.nodes[static_cast<std::size_t>(id)].value = mean;

    if (idx.size() < opts_.min_node_size) return id;
    const bool pure = std::all_of(idx.begin(), idx.end(),
                                  [&](std::size_t i) { return samples_[i].target == samples_[idx[0]].target; });
    if (pure) return id;

    double parent_sse = 0.0;
    for (std::size_t i : idx) {
      const double d = samples_[i].target - mean;
      parent_sse += d * d;
    }
    const Split split = best_split(idx, mean);
    if (split.feature < 0 || !(split.sse < parent_sse * (1.0 - 1e-12))) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx)
      (samples_[i].features[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    const int l = grow(tree, left);
    const int r = grow(tree, right);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& idx, double mean) {
    std::array<int, kFeatureCount> order{};
    std::iota(order.begin(), order.end(), 0);
    const int mtry = std::clamp(opts_.mtry, 1, static_cast<int>(kFeatureCount));
    for (int m = 0; m < mtry; ++m) {
      const std::size_t pick = static_cast<std::size_t>(m) + uniform_index(rng_, kFeatureCount - static_cast<std::size_t>(m));
      std::swap(order[static_cast<std::size_t>(m)], order[pick]);
    }

    Split best;
    const std::size_t n = idx.size();
    std::vector<std::size_t> sorted(idx);
    for (int m = 0; m < mtry; ++m) {
      const auto f = static_cast<std::size_t>(order[static_cast<std::size_t>(m)]);
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        const double va = samples_[a].features[f];
        const double vb = samples_[b].features[f];
        return va < vb || (va == vb && a < b);
      });
      // Targets are centred on the node mean to keep the sums well conditioned.
      double total = 0.0, total_sq = 0.0;
      for (std::size_t i : sorted) {
        const double t = samples_[i].target - mean;
        total += t;
        total_sq += t * t;
      }
      double left_sum = 0.0, left_sq = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const double t = samples_[sorted[k]].target - mean;
        left_sum += t;
        left_sq += t * t;
        const double v = samples_[sorted[k]].features[f];
        const double next = samples_[sorted[k + 1]].features[f];
        if (!(v < next)) continue;
        const double nl = static_cast<double>(k + 1);
        const double nr = static_cast<double>(n - k - 1);
        const double right_sum = total - left_sum;
        const double sse = (left_sq - left_sum * left_sum / nl) + (total_sq - left_sq - right_sum * right_sum / nr);
        if (best.feature < 0 || sse < best.sse) {
          double mid = v + (next - v) / 2.0;
          if (!(mid < next)) mid = v;
          best = {static_cast<int>(f), mid, sse};
        }
      }
    }
    return best;
  }

  std::span<const TrainingSample> samples_;
  const ForestOptions& opts_;
  Rng& rng_;
};

}  // namespace detail

inline ForestModel train_forest(std::span<const TrainingSample> samples, std::uint64_t seed,
                                const ForestOptions& opts = {}) {
  if (samples.empty()) throw NoSamples("train_forest: no training samples");
  ForestModel model;
  model.seed = seed;
  model.trees.reserve(static_cast<std::size_t>(opts.n_trees));
  for (int t = 0; t < opts.n_trees; ++t) {
    auto indices = bootstrap_indices(samples.size(), seed, t);
    Rng rng(derive_seed(seed ^ 0x5eedf0e57ULL, static_cast<std::uint64_t>(t)));
    detail::TreeBuilder builder(samples, opts, rng);
    model.trees.push_back(builder.build(std::move(indices)));
  }
  return model;
}

inline double predict_forest(const ForestModel& model, const FeatureVector& x) {
  const double base = model.trees.front().predict(x);
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += tree.predict(x) - base;
  return base + sum / static_cast<double>(model.trees.size());
}

}  // namespace lesionseg
