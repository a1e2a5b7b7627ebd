#pragma once

// Reference implementations and fixtures shared by the tests. Everything here
// is written the slow, obvious way so it can serve as an oracle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "lesionseg/morphology.hpp"
#include "lesionseg/raster.hpp"

namespace testsupport {

using lesionseg::BinaryMask;
using lesionseg::Plane;
using lesionseg::RgbImage;

inline BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
  std::bernoulli_distribution on(density);
  BinaryMask m(w, h);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = on(rng) ? 1 : 0;
  return m;
}

/// Random union of filled disks.
inline BinaryMask random_blobs(std::mt19937_64& rng, int w, int h, int count, int rmin, int rmax) {
  std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1), pr(rmin, rmax);
  BinaryMask m(w, h);
  for (int i = 0; i < count; ++i) {
    const int cx = px(rng), cy = py(rng), r = pr(rng);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m(x, y) = 1;
  }
  return m;
}

inline BinaryMask disk_mask(int w, int h, double cx, double cy, double r) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m(x, y) = 1;
  return m;
}

inline std::vector<std::pair<int, int>> disk_offsets(int r) {
  std::vector<std::pair<int, int>> out;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r * r) out.emplace_back(dx, dy);
  return out;
}

// Naive morphology over a disk: out-of-image pixels are ignored by both
// operators.
inline BinaryMask naive_dilate(const BinaryMask& in, int r) {
  BinaryMask out(in.width(), in.height());
  const auto offs = disk_offsets(r);
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      bool v = false;
      for (auto [dx, dy] : offs) {
        const int sx = x - dx, sy = y - dy;
        if (in.contains(sx, sy) && in(sx, sy)) v = true;
      }
      out(x, y) = v;
    }
  return out;
}

inline BinaryMask naive_erode(const BinaryMask& in, int r) {
  BinaryMask out(in.width(), in.height());
  const auto offs = disk_offsets(r);
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      bool v = true;
      for (auto [dx, dy] : offs) {
        const int sx = x + dx, sy = y + dy;
        if (in.contains(sx, sy) && !in(sx, sy)) v = false;
      }
      out(x, y) = v;
    }
  return out;
}

inline Plane naive_gray(const Plane& in, int r, bool max) {
  Plane out(in.width(), in.height());
  const auto offs = disk_offsets(r);
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      double v = max ? -INFINITY : INFINITY;
      for (auto [dx, dy] : offs) {
        const int sx = x + dx, sy = y + dy;
        if (!in.contains(sx, sy)) continue;
        v = max ? std::max(v, in(sx, sy)) : std::min(v, in(sx, sy));
      }
      out(x, y) = v;
    }
  return out;
}

/// Component labels (0 = background, 1.. in raster-scan order of first pixel)
/// by breadth-first flood fill.
inline std::vector<int> flood_labels(const BinaryMask& m, bool eight) {
  std::vector<int> label(m.size(), 0);
  int next = 0;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y) || label[m.index(x, y)]) continue;
      ++next;
      std::vector<std::pair<int, int>> queue{{x, y}};
      label[m.index(x, y)] = next;
      for (std::size_t q = 0; q < queue.size(); ++q) {
        auto [cx, cy] = queue[q];
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (!eight && dx != 0 && dy != 0) continue;
            const int nx = cx + dx, ny = cy + dy;
            if (!m.contains(nx, ny) || !m(nx, ny) || label[m.index(nx, ny)]) continue;
            label[m.index(nx, ny)] = next;
            queue.emplace_back(nx, ny);
          }
      }
    }
  return label;
}

/// Holes filled: background not 4-connected to the border becomes foreground.
inline BinaryMask naive_fill_holes(const BinaryMask& m) {
  const BinaryMask bg = lesionseg::complement(m);
  const auto lab = flood_labels(bg, false);
  std::vector<bool> touches(lab.size() + 1, false);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (x == 0 || y == 0 || x == m.width() - 1 || y == m.height() - 1) touches[static_cast<std::size_t>(lab[m.index(x, y)])] = true;
  BinaryMask out = m;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!m[i] && !touches[static_cast<std::size_t>(lab[i])]) out[i] = 1;
  return out;
}

inline RgbImage random_image(std::mt19937_64& rng, int w, int h, double lo = 0.0, double hi = 255.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RgbImage img(w, h);
  for (auto& p : img.planes)
    for (double& v : p.pixels()) v = u(rng);
  return img;
}

/// Fresh temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lesionseg_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
