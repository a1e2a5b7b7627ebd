#pragma once

// Binary and grayscale mathematical morphology with flat structuring elements.
//
// Border policy: pixels outside the image never contribute to a window. For a
// binary dilation that is the same as treating them as background; for an
// erosion it is the same as treating them as foreground, so that full masks
// and constant planes are fixed points of every operator.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <type_traits>
#include <utility>
#include <vector>

#include "lesionseg/raster.hpp"

namespace lesionseg {

struct Offset {
  int dx = 0;
  int dy = 0;
  auto operator<=>(const Offset&) const = default;
};

/// Flat structuring element: a set of integer offsets that contains the origin.
class StructuringElement {
 public:
  /// Horizontal run of offsets dx in [x0, x1] on row dy.
  struct Run {
    int dy;
    int x0;
    int x1;
  };

  StructuringElement() : StructuringElement(std::vector<Offset>{{0, 0}}) {}

  explicit StructuringElement(std::vector<Offset> offsets, int radius = 0) : radius_(radius) {
    std::sort(offsets.begin(), offsets.end(),
              [](const Offset& a, const Offset& b) { return std::pair(a.dy, a.dx) < std::pair(b.dy, b.dx); });
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    if (std::find(offsets.begin(), offsets.end(), Offset{0, 0}) == offsets.end())
      throw Error("structuring element must contain the origin");
    offsets_ = std::move(offsets);
    for (std::size_t i = 0; i < offsets_.size();) {
      std::size_t j = i + 1;
      while (j < offsets_.size() && offsets_[j].dy == offsets_[i].dy && offsets_[j].dx == offsets_[j - 1].dx + 1) ++j;
      runs_.push_back({offsets_[i].dy, offsets_[i].dx, offsets_[j - 1].dx});
      i = j;
    }
  }

  int radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return offsets_.size(); }
  const std::vector<Offset>& offsets() const noexcept { return offsets_; }
  const std::vector<Run>& runs() const noexcept { return runs_; }

  StructuringElement reflected() const {
    std::vector<Offset> r;
    r.reserve(offsets_.size());
    for (const Offset& o : offsets_) r.push_back({-o.dx, -o.dy});
    return StructuringElement(std::move(r), radius_);
  }

 private:
  int radius_ = 0;
  std::vector<Offset> offsets_;
  std::vector<Run> runs_;
};

/// Digital disk: all (dx, dy) with dx^2 + dy^2 <= radius^2.
inline StructuringElement disk(int radius) {
  if (radius < 0) throw Error("disk: radius must be non-negative");
  std::vector<Offset> offsets;
  const long long r2 = static_cast<long long>(radius) * radius;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (static_cast<long long>(dx) * dx + static_cast<long long>(dy) * dy <= r2) offsets.push_back({dx, dy});
  return StructuringElement(std::move(offsets), radius);
}

namespace detail {

// out(x, y) = reduce over offsets (dx, dy) of in(x + dx, y + dy), in-image only.
// For binary rasters "any" selects OR, otherwise AND.
inline BinaryMask binary_window(const BinaryMask& in, const StructuringElement& se, bool any) {
  const int w = in.width();
  const int h = in.height();
  std::vector<int> prefix(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    int* p = prefix.data() + static_cast<std::size_t>(y) * (w + 1);
    auto r = in.row(y);
    p[0] = 0;
    for (int x = 0; x < w; ++x) p[x + 1] = p[x] + (r[x] ? 1 : 0);
  }

  BinaryMask out(w, h, any ? 0 : 1);
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    for (const auto& run : se.runs()) {
      const int sy = y + run.dy;
      if (sy < 0 || sy >= h) continue;
      const int* p = prefix.data() + static_cast<std::size_t>(sy) * (w + 1);
      for (int x = 0; x < w; ++x) {
        const int lo = std::max(0, x + run.x0);
        const int hi = std::min(w - 1, x + run.x1);
        if (lo > hi) continue;
        const int ones = p[hi + 1] - p[lo];
        if (any) {
          dst[x] |= static_cast<std::uint8_t>(ones > 0);
        } else {
          dst[x] &= static_cast<std::uint8_t>(ones == hi - lo + 1);
        }
      }
    }
  }
  return out;
}

// Sliding-window extremum along one row for windows [x + x0, x + x1].
template <typename T, typename Better>
void row_extremum(std::span<const T> src, int x0, int x1, Better better, std::vector<T>& dst,
                  std::vector<std::uint8_t>& valid) {
  const int w = static_cast<int>(src.size());
  std::deque<int> window;
  int next = 0;
  for (int x = 0; x < w; ++x) {
    const int lo = std::max(0, x + x0);
    const int hi = std::min(w - 1, x + x1);
    for (; next <= hi; ++next) {
      while (!window.empty() && !better(src[window.back()], src[next])) window.pop_back();
      window.push_back(next);
    }
    while (!window.empty() && window.front() < lo) window.pop_front();
    if (lo > hi || window.empty()) {
      valid[static_cast<std::size_t>(x)] = 0;
    } else {
      valid[static_cast<std::size_t>(x)] = 1;
      dst[static_cast<std::size_t>(x)] = src[window.front()];
    }
  }
}

template <typename T, typename Better>
Raster<T> gray_window(const Raster<T>& in, const StructuringElement& se, Better better) {
  const int w = in.width();
  const int h = in.height();
  Raster<T> out(w, h);
  std::vector<std::uint8_t> have(static_cast<std::size_t>(w));
  std::vector<T> buf(static_cast<std::size_t>(w));
  std::vector<std::uint8_t> valid(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    std::fill(have.begin(), have.end(), 0);
    for (const auto& run : se.runs()) {
      const int sy = y + run.dy;
      if (sy < 0 || sy >= h) continue;
      row_extremum<T>(in.row(sy), run.x0, run.x1, better, buf, valid);
      for (int x = 0; x < w; ++x) {
        const auto i = static_cast<std::size_t>(x);
        if (!valid[i]) continue;
        if (!have[i] || better(buf[i], dst[x])) dst[x] = buf[i];
        have[i] = 1;
      }
    }
    // Only possible for elements whose offsets all leave the image; keep the input.
    for (int x = 0; x < w; ++x)
      if (!have[static_cast<std::size_t>(x)]) dst[x] = in(x, y);
  }
  return out;
}

}  // namespace detail

/// Minkowski dilation: out(p) = max over b in se of in(p - b).
template <typename T>
Raster<T> dilate(const Raster<T>& in, const StructuringElement& se) {
  const StructuringElement reflected = se.reflected();
  if constexpr (std::is_same_v<T, std::uint8_t>) {
    return detail::binary_window(in, reflected, true);
  } else {
    return detail::gray_window(in, reflected, [](const T& a, const T& b) { return a > b; });
  }
}

/// Minkowski erosion: out(p) = min over b in se of in(p + b).
template <typename T>
Raster<T> erode(const Raster<T>& in, const StructuringElement& se) {
  if constexpr (std::is_same_v<T, std::uint8_t>) {
    return detail::binary_window(in, se, false);
  } else {
    return detail::gray_window(in, se, [](const T& a, const T& b) { return a < b; });
  }
}

template <typename T>
Raster<T> open(const Raster<T>& in, const StructuringElement& se) {
  return dilate(erode(in, se), se);
}

template <typename T>
Raster<T> close(const Raster<T>& in, const StructuringElement& se) {
  return erode(dilate(in, se), se);
}

/// 3x3 median with edge-replicated borders.
inline Plane median3x3(const Plane& in) {
  const int w = in.width();
  const int h = in.height();
  Plane out(w, h);
  std::array<double, 9> window{};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int sy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -1; dx <= 1; ++dx) window[static_cast<std::size_t>(n++)] = in(std::clamp(x + dx, 0, w - 1), sy);
      }
      std::nth_element(window.begin(), window.begin() + 4, window.end());
      out(x, y) = window[4];
    }
  }
  return out;
}

}  // namespace lesionseg
