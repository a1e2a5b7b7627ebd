#pragma once

// Ten-dimensional region descriptor and the corpus statistics it is
// measured against.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "lesionseg/preprocess.hpp"
#include "lesionseg/raster.hpp"
#include "lesionseg/regions.hpp"

namespace lesionseg {

inline constexpr int kAreaBins = 500;
inline constexpr std::size_t kFeatureCount = 10;
inline constexpr int kFeatureStatsFormatVersion = 1;

/// Component order is part of the model file format.
using FeatureVector = std::array<double, kFeatureCount>;

enum FeatureIndex : std::size_t {
  kArea = 0,
  kPosition,
  kCircularity,
  kSolidity,
  kColorRed,
  kColorGreen,
  kColorBlue,
  kCenterRed,
  kCenterGreen,
  kCenterBlue,
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "area", "position", "circularity", "solidity", "color_r",
    "color_g", "color_b", "center_r", "center_g", "center_b"};

struct FeatureStats {
  std::array<double, kAreaBins> area_hist{};  // max-normalized counts over [0, 1024^2]
  std::array<double, 2> centroid_mean{};
  std::array<double, 4> centroid_cov{1.0, 0.0, 0.0, 1.0};  // row-major 2x2
  std::array<double, 3> color_mean{};
  std::array<double, 3> color_std{1.0, 1.0, 1.0};

  bool operator==(const FeatureStats&) const = default;
};

/// What the statistics need from one ground-truth lesion in normalized space.
struct LesionSummary {
  std::size_t area = 0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  std::array<double, 3> mean_color{};
};

inline constexpr double kFallbackCentroidVariance = 128.0 * 128.0;

inline int area_bin(std::size_t area) {
  constexpr std::size_t frame = static_cast<std::size_t>(kNormalizedSide) * kNormalizedSide;
  const std::size_t bin = area * kAreaBins / frame;
  return static_cast<int>(std::min<std::size_t>(bin, kAreaBins - 1));
}

/// Returns false for an empty mask.
inline bool summarize_lesion(const RgbImage& normalized, const BinaryMask& truth, LesionSummary& out) {
  if (!truth.same_shape(normalized.planes[0])) throw DimensionMismatch("summarize_lesion: mask/image size differ");
  std::size_t n = 0;
  double sx = 0.0, sy = 0.0;
  std::array<double, 3> color{};
  for (int y = 0; y < truth.height(); ++y)
    for (int x = 0; x < truth.width(); ++x) {
      if (!truth(x, y)) continue;
      ++n;
      sx += x;
      sy += y;
      for (int c = 0; c < 3; ++c) color[c] += normalized.planes[c](x, y);
    }
  if (n == 0) return false;
  out.area = n;
  out.centroid_x = sx / static_cast<double>(n);
  out.centroid_y = sy / static_cast<double>(n);
  for (int c = 0; c < 3; ++c) out.mean_color[c] = color[c] / static_cast<double>(n);
  return true;
}

/// Area histogram, centroid Gaussian (sample mean / covariance) and per-channel
/// lesion colour Gaussians from a set of ground-truth lesions.
inline FeatureStats build_feature_stats(std::span<const LesionSummary> lesions) {
  if (lesions.empty()) throw EmptyCorpus("build_feature_stats: no lesions to learn from");
  FeatureStats s;
  const double n = static_cast<double>(lesions.size());

  std::array<double, kAreaBins> counts{};
  for (const auto& l : lesions) counts[static_cast<std::size_t>(area_bin(l.area))] += 1.0;
  const double peak = *std::max_element(counts.begin(), counts.end());
  for (int b = 0; b < kAreaBins; ++b) s.area_hist[static_cast<std::size_t>(b)] = counts[static_cast<std::size_t>(b)] / peak;

  for (const auto& l : lesions) {
    s.centroid_mean[0] += l.centroid_x;
    s.centroid_mean[1] += l.centroid_y;
  }
  s.centroid_mean[0] /= n;
  s.centroid_mean[1] /= n;
  s.centroid_cov = {kFallbackCentroidVariance, 0.0, 0.0, kFallbackCentroidVariance};
  if (lesions.size() > 1) {
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& l : lesions) {
      const double dx = l.centroid_x - s.centroid_mean[0];
      const double dy = l.centroid_y - s.centroid_mean[1];
      sxx += dx * dx;
      sxy += dx * dy;
      syy += dy * dy;
    }
    sxx /= n - 1.0;
    sxy /= n - 1.0;
    syy /= n - 1.0;
    const double det = sxx * syy - sxy * sxy;
    if (sxx > 0.0 && syy > 0.0 && det > 1e-9 * sxx * syy) s.centroid_cov = {sxx, sxy, sxy, syy};
  }

  for (int c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (const auto& l : lesions) mean += l.mean_color[c];
    mean /= n;
    double var = 0.0;
    for (const auto& l : lesions) var += (l.mean_color[c] - mean) * (l.mean_color[c] - mean);
    const double sd = lesions.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    s.color_mean[c] = mean;
    s.color_std[c] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

/// Builds statistics from (raw image, ground truth) pairs. Images are
/// preprocessed and masks normalized; empty masks are skipped with a warning.
inline FeatureStats build_feature_stats(std::span<const std::pair<RgbImage, BinaryMask>> corpus,
                                        std::vector<std::string>* warnings = nullptr) {
  if (corpus.empty()) throw EmptyCorpus("build_feature_stats: empty corpus");
  std::vector<LesionSummary> lesions;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& [image, truth] = corpus[i];
    if (!image.planes[0].same_shape(truth))
      throw DimensionMismatch("build_feature_stats: image/mask size differ for entry " + std::to_string(i));
    const NormalizedImage norm = preprocess(image);
    LesionSummary l;
    if (summarize_lesion(norm.image, normalize_mask(truth), l)) {
      lesions.push_back(l);
    } else if (warnings) {
      warnings->push_back("entry " + std::to_string(i) + ": empty ground-truth mask skipped");
    }
  }
  return build_feature_stats(std::span<const LesionSummary>(lesions));
}

inline double area_feature(std::size_t area, const FeatureStats& stats) {
  return stats.area_hist[static_cast<std::size_t>(area_bin(area))];
}

inline double position_feature(double x, double y, const FeatureStats& stats) {
  const auto& s = stats.centroid_cov;
  const double det = s[0] * s[3] - s[1] * s[2];
  const double dx = x - stats.centroid_mean[0];
  const double dy = y - stats.centroid_mean[1];
  // (c - mu)^T inverse(S) (c - mu) for a symmetric 2x2 S
  const double m = (s[3] * dx * dx - (s[1] + s[2]) * dx * dy + s[0] * dy * dy) / det;
  return std::exp(-0.5 * m);
}

/// 4 pi A / p^2 capped at 1; a region without perimeter (one pixel) counts as round.
inline double circularity(const Region& region) {
  if (!(region.perimeter > 0.0)) return 1.0;
  const double c = 4.0 * std::numbers::pi * static_cast<double>(region.area) / (region.perimeter * region.perimeter);
  return std::min(1.0, c);
}

inline double solidity(const Region& region) {
  return static_cast<double>(region.area) / static_cast<double>(region.convex_area);
}

inline double gaussian_similarity(double value, double mean, double sd) {
  const double d = value - mean;
  return std::exp(-(d * d) / (2.0 * sd * sd));
}

inline std::array<double, 3> region_mean_color(const Region& region, const RgbImage& img) {
  std::array<double, 3> sum{};
  region.for_each_pixel([&](int x, int y) {
    for (int c = 0; c < 3; ++c) sum[c] += img.planes[c](x, y);
  });
  for (double& v : sum) v /= static_cast<double>(region.area);
  return sum;
}

inline std::array<double, 3> color_features(const Region& region, const RgbImage& img, const FeatureStats& stats) {
  const auto m = region_mean_color(region, img);
  std::array<double, 3> f{};
  for (int c = 0; c < 3; ++c) f[c] = gaussian_similarity(m[c], stats.color_mean[c], stats.color_std[c]);
  return f;
}

/// Mean and standard deviation of each channel over the central ninth of the
/// image: rows and columns floor(S/3) .. ceil(2S/3) - 1.
struct CenterStats {
  std::array<double, 3> mean{};
  std::array<double, 3> std{1.0, 1.0, 1.0};
};

inline CenterStats center_stats(const RgbImage& img) {
  auto bounds = [](int s) { return std::pair{s / 3, (2 * s + 2) / 3 - 1}; };
  const auto [x0, x1] = bounds(img.width());
  const auto [y0, y1] = bounds(img.height());
  CenterStats cs;
  const double n = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) sum += img.planes[c](x, y);
    const double mean = sum / n;
    double var = 0.0;
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d = img.planes[c](x, y) - mean;
        var += d * d;
      }
    const double sd = std::sqrt(var / n);
    cs.mean[c] = mean;
    cs.std[c] = sd > 0.0 ? sd : 1.0;
  }
  return cs;
}

inline std::array<double, 3> center_similarity_features(const Region& region, const RgbImage& img,
                                                        const CenterStats& center) {
  const auto m = region_mean_color(region, img);
  std::array<double, 3> f{};
  for (int c = 0; c < 3; ++c) f[c] = gaussian_similarity(m[c], center.mean[c], center.std[c]);
  return f;
}

inline std::array<double, 3> center_similarity_features(const Region& region, const RgbImage& img) {
  return center_similarity_features(region, img, center_stats(img));
}

/// Computes feature vectors for regions of one image; the central-block
/// statistics are measured once per image.
class FeatureExtractor {
 public:
  FeatureExtractor(const RgbImage& img, const FeatureStats& stats)
      : img_(&img), stats_(&stats), center_(center_stats(img)) {}

  FeatureVector operator()(const Region& region) const {
    const auto mean = region_mean_color(region, *img_);
    FeatureVector f{};
    f[kArea] = area_feature(region.area, *stats_);
    f[kPosition] = position_feature(region.centroid_x, region.centroid_y, *stats_);
    f[kCircularity] = circularity(region);
    f[kSolidity] = solidity(region);
    for (int c = 0; c < 3; ++c) {
      const auto i = static_cast<std::size_t>(c);
      f[kColorRed + i] = gaussian_similarity(mean[i], stats_->color_mean[i], stats_->color_std[i]);
      f[kCenterRed + i] = gaussian_similarity(mean[i], center_.mean[i], center_.std[i]);
    }
    return f;
  }

  const CenterStats& center() const noexcept { return center_; }

 private:
  const RgbImage* img_;
  const FeatureStats* stats_;
  CenterStats center_;
};

inline FeatureVector feature_vector(const Region& region, const RgbImage& img, const FeatureStats& stats) {
  return FeatureExtractor(img, stats)(region);
}

inline FeatureVector feature_vector(const Region& region, const NormalizedImage& img, const FeatureStats& stats) {
  return feature_vector(region, img.image, stats);
}

// ---------------------------------------------------------------------------
// JSON persistence

inline nlohmann::json to_json_value(const FeatureStats& s) {
  nlohmann::json j;
  j["format_version"] = kFeatureStatsFormatVersion;
  j["area_bins"] = kAreaBins;
  j["area_hist"] = s.area_hist;
  j["centroid_mean"] = s.centroid_mean;
  j["centroid_cov"] = s.centroid_cov;
  j["color_mean"] = s.color_mean;
  j["color_std"] = s.color_std;
  return j;
}

namespace detail {

template <std::size_t N>
std::array<double, N> read_array(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != N)
    throw CorruptFile(std::string("feature stats: field '") + key + "' missing or wrong length");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j.at(key)[i].is_number()) throw CorruptFile(std::string("feature stats: non-numeric value in '") + key + "'");
    out[i] = j.at(key)[i].get<double>();
  }
  return out;
}

}  // namespace detail

inline FeatureStats feature_stats_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("format_version")) throw CorruptFile("feature stats: missing format_version");
  if (j.at("format_version") != kFeatureStatsFormatVersion)
    throw VersionMismatch("feature stats: unsupported format_version " + j.at("format_version").dump());
  FeatureStats s;
  s.area_hist = detail::read_array<kAreaBins>(j, "area_hist");
  s.centroid_mean = detail::read_array<2>(j, "centroid_mean");
  s.centroid_cov = detail::read_array<4>(j, "centroid_cov");
  s.color_mean = detail::read_array<3>(j, "color_mean");
  s.color_std = detail::read_array<3>(j, "color_std");
  return s;
}

inline void save_feature_stats(const std::filesystem::path& path, const FeatureStats& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json_value(s).dump(2) << '\n';
}

inline FeatureStats load_feature_stats(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile("feature stats " + path.string() + ": " + e.what());
  }
  return feature_stats_from_json(j);
}

}  // namespace lesionseg
