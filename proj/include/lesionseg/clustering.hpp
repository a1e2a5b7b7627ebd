#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lesionseg/kmeans.hpp"
#include "lesionseg/morphology.hpp"
#include "lesionseg/preprocess.hpp"
#include "lesionseg/regions.hpp"

namespace lesionseg {

inline constexpr int kCleanupRadius = 10;
inline constexpr std::size_t kDefaultMinArea = 256;

/// A connected region produced by one cluster of a k-means run.
struct CandidateRegion {
  Region region;
  int cluster = 0;  // k-means label the region came from
  int order = 0;    // position in the returned list (scan order within the cluster)
};

struct ClusterMasks {
  KMeansResult<3> kmeans;
  std::vector<BinaryMask> masks;  // one cleaned mask per cluster
};

inline std::vector<std::array<double, 3>> pixel_colors(const RgbImage& img) {
  std::vector<std::array<double, 3>> pts(img.planes[0].size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {img.planes[0][i], img.planes[1][i], img.planes[2][i]};
  return pts;
}

/// k-means on raw RGB pixel values, then opening and closing of each
/// cluster's mask with disk(10). Masks are cleaned independently and may
/// overlap afterwards.
inline ClusterMasks cluster_masks(const RgbImage& img, int k, std::uint64_t seed) {
  const auto pts = pixel_colors(img);
  ClusterMasks out;
  KMeansOptions opts;
  opts.seed = seed;
  out.kmeans = kmeans<3>(pts, k, opts);
  const StructuringElement se = disk(kCleanupRadius);
  out.masks.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    BinaryMask m(img.width(), img.height());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = out.kmeans.labels[i] == c ? 1 : 0;
    out.masks.push_back(close(open(m, se), se));
  }
  return out;
}

/// Connected regions of all cleaned cluster masks with area >= min_area,
/// ordered by cluster then raster scan.
inline std::vector<CandidateRegion> cluster_regions(const NormalizedImage& img, int k, std::uint64_t seed,
                                                    std::size_t min_area = kDefaultMinArea) {
  if (k < 1) throw InvalidK("cluster_regions: k must be >= 1");
  const ClusterMasks clusters = cluster_masks(img.image, k, seed);
  std::vector<CandidateRegion> out;
  for (int c = 0; c < k; ++c) {
    for (Region& r : connected_components(clusters.masks[static_cast<std::size_t>(c)], min_area)) {
      CandidateRegion cand;
      cand.region = std::move(r);
      cand.cluster = c;
      cand.order = static_cast<int>(out.size());
      out.push_back(std::move(cand));
    }
  }
  return out;
}

}  // namespace lesionseg
