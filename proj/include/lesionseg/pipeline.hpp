#pragma once

// Increase-k segmentation loop: cluster, score every candidate region, keep
// the best one, stop once a larger k stops helping, then postprocess.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lesionseg/clustering.hpp"
#include "lesionseg/model_bundle.hpp"

namespace lesionseg {

inline constexpr int kPostCloseRadius = 30;
inline constexpr int kPostDilateRadius = 14;

struct SegmentationConfig {
  int k_start = 3;
  int k_max = 12;
  double improvement_tol = 1e-6;
  std::uint64_t seed = 0;
  std::size_t min_area = kDefaultMinArea;

  void validate() const {
    if (k_start < 1 || k_start > k_max)
      throw Error("config: need 1 <= k_start <= k_max (got k_start=" + std::to_string(k_start) +
                  ", k_max=" + std::to_string(k_max) + ")");
    if (!(improvement_tol >= 0.0)) throw Error("config: improvement_tol must be >= 0");
  }
};

struct ScoredRegion {
  CandidateRegion candidate;
  double score = 0.0;
  int k = 0;
};

/// Strict preference between scored regions: score, then larger area, then
/// smaller cluster index, then scan order, then smaller k.
inline bool better_region(const ScoredRegion& a, const ScoredRegion& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.candidate.region.area != b.candidate.region.area) return a.candidate.region.area > b.candidate.region.area;
  if (a.candidate.cluster != b.candidate.cluster) return a.candidate.cluster < b.candidate.cluster;
  if (a.candidate.order != b.candidate.order) return a.candidate.order < b.candidate.order;
  return a.k < b.k;
}

struct KLoopResult {
  std::optional<ScoredRegion> best;
  std::vector<std::pair<int, double>> per_k_best;  // only k values that produced regions
  int rounds = 0;                                  // clustering runs performed
};

/// Clustering seed used at a given k.
inline std::uint64_t k_seed(std::uint64_t seed, int k) { return derive_seed(seed, static_cast<std::uint64_t>(k)); }

/// Runs the k loop. `clusterer(k, seed)` returns the candidate regions for k,
/// `scorer(candidate)` scores one of them and `visit(k, candidate, score)` sees
/// every scored region. The loop stops after the first k whose best region
/// does not beat the running best by more than improvement_tol, or at k_max.
/// A k that yields no regions before any region has been seen does not stop
/// the loop.
template <typename Clusterer, typename Scorer, typename Visitor>
KLoopResult run_k_loop(const SegmentationConfig& cfg, Clusterer&& clusterer, Scorer&& scorer, Visitor&& visit) {
  cfg.validate();
  KLoopResult out;
  for (int k = cfg.k_start; k <= cfg.k_max; ++k) {
    std::vector<CandidateRegion> candidates = clusterer(k, k_seed(cfg.seed, k));
    ++out.rounds;
    std::optional<ScoredRegion> round_best;
    for (CandidateRegion& c : candidates) {
      const double s = scorer(static_cast<const CandidateRegion&>(c));
      visit(k, static_cast<const CandidateRegion&>(c), s);
      ScoredRegion sr{std::move(c), s, k};
      if (!round_best || better_region(sr, *round_best)) round_best = std::move(sr);
    }
    if (!round_best) {
      if (out.best) break;
      continue;
    }
    out.per_k_best.emplace_back(k, round_best->score);
    const bool improved = !out.best || round_best->score > out.best->score + cfg.improvement_tol;
    if (!out.best || better_region(*round_best, *out.best)) out.best = std::move(round_best);
    if (!improved) break;
  }
  return out;
}

template <typename Clusterer, typename Scorer>
KLoopResult run_k_loop(const SegmentationConfig& cfg, Clusterer&& clusterer, Scorer&& scorer) {
  return run_k_loop(cfg, std::forward<Clusterer>(clusterer), std::forward<Scorer>(scorer),
                    [](int, const CandidateRegion&, double) {});
}

/// fill_holes, close with disk(30), dilate with disk(14).
inline BinaryMask postprocess(const BinaryMask& mask) {
  BinaryMask m = fill_holes(mask);
  m = close(m, disk(kPostCloseRadius));
  return dilate(m, disk(kPostDilateRadius));
}

struct SegmentationOutcome {
  BinaryMask mask;  // original image geometry
  double best_score = 0.0;
  int best_k = 0;
  std::vector<std::pair<int, double>> per_k_best;
  std::vector<std::string> warnings;
  bool no_regions = false;
};

/// k loop over an already preprocessed image, scored by the ensemble.
inline KLoopResult segment_normalized(const NormalizedImage& norm, const ModelBundle& bundle,
                                      const SegmentationConfig& cfg) {
  const FeatureExtractor extract(norm.image, bundle.stats);
  return run_k_loop(
      cfg, [&](int k, std::uint64_t seed) { return cluster_regions(norm, k, seed, cfg.min_area); },
      [&](const CandidateRegion& c) { return ensemble_score(bundle, extract(c.region)); });
}

inline SegmentationOutcome segment(const RgbImage& img, const ModelBundle& bundle, const SegmentationConfig& cfg) {
  cfg.validate();
  const NormalizedImage norm = preprocess(img);
  const KLoopResult loop = segment_normalized(norm, bundle, cfg);

  SegmentationOutcome out;
  out.warnings = norm.warnings;
  out.per_k_best = loop.per_k_best;
  if (!loop.best) {
    out.no_regions = true;
    out.mask = BinaryMask(img.width(), img.height(), 1);
    out.warnings.emplace_back("NoRegions: no k produced a region of at least " + std::to_string(cfg.min_area) +
                              " pixels; returning the full-image mask");
    return out;
  }
  out.best_score = loop.best->score;
  out.best_k = loop.best->k;
  out.mask = restore_mask(postprocess(loop.best->candidate.region.to_mask()), norm.pad_info);
  return out;
}

}  // namespace lesionseg
