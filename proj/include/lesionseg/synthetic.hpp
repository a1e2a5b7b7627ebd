#pragma once

// Synthetic dermoscopy-like images with exact ground truth: a dark elliptical
// lesion near the centre, hair strokes, specular speckles, sensor noise and a
// global colour cast. Used for end-to-end checks and demos.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "lesionseg/random.hpp"
#include "lesionseg/raster.hpp"

namespace lesionseg {

struct SyntheticOptions {
  int min_width = 360, max_width = 480;
  int min_height = 300, max_height = 400;
  double min_axis = 0.22, max_axis = 0.35;  // semi-axes as fractions of min(width, height)
  double max_offset = 0.08;                 // centre offset as a fraction of each dimension
  int min_hairs = 3, max_hairs = 8;
  int min_speckles = 20, max_speckles = 60;
  double noise_sigma = 4.0;
  double max_cast = 0.15;  // per-channel gain in [1 - max_cast, 1 + max_cast]
};

struct SyntheticLesion {
  RgbImage image;  // integer values in [0, 255]
  BinaryMask truth;
};

namespace detail {

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1))); }

inline double gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline void paint_disc(RgbImage& img, double cx, double cy, double r, const std::array<double, 3>& rgb, double alpha) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(cx + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(cy + r)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy > r * r) continue;
      for (int c = 0; c < 3; ++c) img.planes[c](x, y) += alpha * (rgb[c] - img.planes[c](x, y));
    }
}

}  // namespace detail

inline SyntheticLesion make_synthetic_lesion(std::uint64_t seed, const SyntheticOptions& o = {}) {
  using detail::uniform;
  Rng rng(derive_seed(seed, 0x73796e7468ULL));
  const int w = detail::uniform_int(rng, o.min_width, o.max_width);
  const int h = detail::uniform_int(rng, o.min_height, o.max_height);
  const double m = std::min(w, h);

  const std::array<double, 3> skin = {uniform(rng, 195, 230), uniform(rng, 150, 180), uniform(rng, 125, 160)};
  const std::array<double, 3> lesion = {uniform(rng, 80, 125), uniform(rng, 45, 80), uniform(rng, 30, 65)};
  const double cx = w / 2.0 + uniform(rng, -o.max_offset, o.max_offset) * w;
  const double cy = h / 2.0 + uniform(rng, -o.max_offset, o.max_offset) * h;
  const double a = uniform(rng, o.min_axis, o.max_axis) * m;
  const double b = uniform(rng, o.min_axis, o.max_axis) * m;
  const double theta = uniform(rng, 0.0, std::numbers::pi);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double gx = uniform(rng, -0.1, 0.1), gy = uniform(rng, -0.1, 0.1);  // illumination gradient

  SyntheticLesion out{RgbImage(w, h), BinaryMask(w, h)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double u = (dx * ct + dy * st) / a;
      const double v = (-dx * st + dy * ct) / b;
      const double r = std::sqrt(u * u + v * v);
      out.truth(x, y) = r <= 1.0 ? 1 : 0;
      // Pigment fades out over the outer rim of the lesion.
      const double t = std::clamp((1.0 - r) / 0.12, 0.0, 1.0);
      const double light = 1.0 + gx * (x - w / 2.0) / w + gy * (y - h / 2.0) / h;
      for (int c = 0; c < 3; ++c) out.image.planes[c](x, y) = light * (skin[c] + t * (lesion[c] - skin[c]));
    }

  const std::array<double, 3> hair_color = {uniform(rng, 30, 60), uniform(rng, 20, 45), uniform(rng, 15, 40)};
  const int hairs = detail::uniform_int(rng, o.min_hairs, o.max_hairs);
  for (int i = 0; i < hairs; ++i) {
    // Quadratic Bezier stroke across a random part of the frame.
    const double x0 = uniform(rng, 0, w), y0 = uniform(rng, 0, h);
    const double x2 = uniform(rng, 0, w), y2 = uniform(rng, 0, h);
    const double x1 = uniform(rng, 0, w), y1 = uniform(rng, 0, h);
    const double width = uniform(rng, 0.6, 1.2);
    const int steps = static_cast<int>(std::hypot(x2 - x0, y2 - y0) * 2.0) + 8;
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const double px = (1 - t) * (1 - t) * x0 + 2 * (1 - t) * t * x1 + t * t * x2;
      const double py = (1 - t) * (1 - t) * y0 + 2 * (1 - t) * t * y1 + t * t * y2;
      detail::paint_disc(out.image, px, py, width, hair_color, 0.9);
    }
  }

  const int speckles = detail::uniform_int(rng, o.min_speckles, o.max_speckles);
  for (int i = 0; i < speckles; ++i) {
    const double ang = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double rad = std::sqrt(uniform01(rng)) * 1.1;
    const double px = cx + rad * (a * std::cos(ang) * ct - b * std::sin(ang) * st);
    const double py = cy + rad * (a * std::cos(ang) * st + b * std::sin(ang) * ct);
    detail::paint_disc(out.image, px, py, uniform(rng, 0.8, 2.2), {255, 255, 255}, 0.95);
  }

  std::array<double, 3> cast{};
  for (auto& g : cast) g = uniform(rng, 1.0 - o.max_cast, 1.0 + o.max_cast);
  for (int c = 0; c < 3; ++c)
    for (double& px : out.image.planes[c].pixels())
      px = std::clamp(std::round(px * cast[c] + o.noise_sigma * detail::gaussian(rng)), 0.0, 255.0);
  return out;
}

}  // namespace lesionseg
