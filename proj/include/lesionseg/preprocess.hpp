#pragma once

// Image normalization: square padding, resize to 1024x1024, specular
// reflection removal, hair removal and gray-world white balance.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "lesionseg/morphology.hpp"
#include "lesionseg/raster.hpp"

namespace lesionseg {

inline constexpr int kNormalizedSide = 1024;

struct NormalizedImage {
  RgbImage image;  // kNormalizedSide x kNormalizedSide
  PadInfo pad_info;
  std::vector<std::string> warnings;
};

/// Nearest-rank percentile (pct in (0, 100]) of an unsorted sample.
inline double nearest_rank_percentile(std::vector<double> values, double pct) {
  if (values.empty()) return 0.0;
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(pct * static_cast<double>(n) / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

struct ReflectionOptions {
  double percentile = 99.0;
  double threshold_fraction = 0.98;
  int max_passes = 10;
};

/// Replaces pixels brighter (R+G+B) than threshold_fraction times the
/// brightness percentile with the mean of their non-bright 8-neighbours.
/// Each pass reads the state left by the previous one; pixels filled in a pass
/// become donors for the next. Pixels that never get a donor stay unchanged.
inline RgbImage remove_reflections(const RgbImage& img, const ReflectionOptions& opts = {}) {
  const int w = img.width();
  const int h = img.height();
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<double> brightness(n);
  for (std::size_t i = 0; i < n; ++i) brightness[i] = img.planes[0][i] + img.planes[1][i] + img.planes[2][i];
  const double t = nearest_rank_percentile(brightness, opts.percentile);
  const double limit = opts.threshold_fraction * t;

  std::vector<std::uint8_t> bright(n);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < n; ++i)
    if (brightness[i] > limit) {
      bright[i] = 1;
      pending.push_back(i);
    }

  RgbImage out = img;
  struct Fill {
    std::size_t index;
    std::array<double, 3> rgb;
  };
  std::vector<Fill> fills;
  for (int pass = 0; pass < opts.max_passes && !pending.empty(); ++pass) {
    fills.clear();
    std::vector<std::size_t> still;
    for (std::size_t idx : pending) {
      const int x = static_cast<int>(idx % static_cast<std::size_t>(w));
      const int y = static_cast<int>(idx / static_cast<std::size_t>(w));
      std::array<double, 3> sum{};
      int donors = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
          if (bright[j]) continue;
          for (int c = 0; c < 3; ++c) sum[c] += out.planes[c][j];
          ++donors;
        }
      if (donors == 0) {
        still.push_back(idx);
        continue;
      }
      for (double& s : sum) s /= donors;
      fills.push_back({idx, sum});
    }
    if (fills.empty()) break;
    for (const Fill& f : fills) {
      for (int c = 0; c < 3; ++c) out.planes[c][f.index] = f.rgb[c];
      bright[f.index] = 0;
    }
    pending = std::move(still);
  }
  return out;
}

/// Per-channel grayscale closing with disk(5) followed by a 3x3 median.
inline RgbImage remove_hair(const RgbImage& img, int radius = 5) {
  const StructuringElement se = disk(radius);
  RgbImage out;
  for (int c = 0; c < 3; ++c) out.planes[c] = median3x3(close(img.planes[c], se));
  return out;
}

struct WhiteBalanceResult {
  RgbImage image;
  bool zero_channel = false;  // balancing was undefined; image returned unchanged
};

/// Gray-world balance: scales red and blue so all channel sums match green.
inline WhiteBalanceResult white_balance(const RgbImage& img) {
  const auto sums = channel_sums(img);
  if (!(sums[0] > 0.0) || !(sums[1] > 0.0) || !(sums[2] > 0.0)) return {img, true};
  WhiteBalanceResult result{img, false};
  const std::array<double, 3> factor = {sums[1] / sums[0], 1.0, sums[1] / sums[2]};
  for (int c : {0, 2})
    for (double& v : result.image.planes[c].pixels()) v *= factor[c];
  return result;
}

/// Geometric part of the normalization only (pad + bilinear resize).
inline RgbImage normalize_geometry(const RgbImage& img, int side = kNormalizedSide) {
  return resize_bilinear(pad_to_square(img), side, side);
}

/// Full preprocessing chain in fixed order.
inline NormalizedImage preprocess(const RgbImage& img) {
  NormalizedImage out;
  out.pad_info = PadInfo::for_size(img.width(), img.height());
  RgbImage work = normalize_geometry(img);
  work = remove_reflections(work);
  work = remove_hair(work);
  auto balanced = white_balance(work);
  if (balanced.zero_channel) out.warnings.emplace_back("white balance skipped: a channel sums to zero");
  out.image = std::move(balanced.image);
  return out;
}

/// Maps a mask at original geometry into the normalized square frame.
inline BinaryMask normalize_mask(const BinaryMask& mask, int side = kNormalizedSide) {
  return resize_nearest(pad_to_square(mask, std::uint8_t{0}), side, side);
}

/// Inverse of normalize_mask for the geometry described by `info`.
inline BinaryMask restore_mask(const BinaryMask& normalized, const PadInfo& info) {
  return crop_padding(resize_nearest(normalized, info.side, info.side), info);
}

}  // namespace lesionseg
