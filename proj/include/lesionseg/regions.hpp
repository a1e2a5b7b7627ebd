#pragma once

// Connected components, region geometry and hole filling.
// Foreground is 8-connected, background 4-connected.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lesionseg/raster.hpp"

namespace lesionseg {

struct Point {
  long long x = 0;
  long long y = 0;
  auto operator<=>(const Point&) const = default;
};

struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;  // inclusive
  int y1 = -1;  // inclusive
  int width() const noexcept { return x1 - x0 + 1; }
  int height() const noexcept { return y1 - y0 + 1; }
  bool operator==(const Box&) const = default;
};

/// A single 8-connected component. The pixel mask is stored cropped to the
/// bounding box; `to_mask()` expands it back to image size.
struct Region {
  int image_width = 0;
  int image_height = 0;
  Box bbox;
  BinaryMask local;  // bbox.width() x bbox.height()
  std::size_t area = 0;
  double perimeter = 0.0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  std::size_t convex_area = 0;

  bool contains(int x, int y) const noexcept {
    return x >= bbox.x0 && x <= bbox.x1 && y >= bbox.y0 && y <= bbox.y1 && local(x - bbox.x0, y - bbox.y0) != 0;
  }

  BinaryMask to_mask() const {
    BinaryMask out(image_width, image_height);
    for (int y = 0; y < local.height(); ++y)
      for (int x = 0; x < local.width(); ++x)
        if (local(x, y)) out(x + bbox.x0, y + bbox.y0) = 1;
    return out;
  }

  template <typename F>
  void for_each_pixel(F&& f) const {
    for (int y = 0; y < local.height(); ++y) {
      auto r = local.row(y);
      for (int x = 0; x < local.width(); ++x)
        if (r[x]) f(x + bbox.x0, y + bbox.y0);
    }
  }
};

namespace detail {

constexpr std::array<int, 8> kDx = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy = {0, 1, 1, 1, 0, -1, -1, -1};

inline bool set_at(const BinaryMask& m, int x, int y) { return m.contains(x, y) && m(x, y) != 0; }

}  // namespace detail

/// Length of the outer boundary of a single 8-connected component, traced as
/// an 8-direction chain code with axis steps weighted 1 and diagonal steps
/// weighted sqrt(2). A lone pixel has perimeter 0.
inline double chain_code_perimeter(const BinaryMask& component) {
  int sx = -1;
  int sy = -1;
  for (int y = 0; y < component.height() && sx < 0; ++y)
    for (int x = 0; x < component.width(); ++x)
      if (component(x, y)) {
        sx = x;
        sy = y;
        break;
      }
  if (sx < 0) return 0.0;

  // Directions are ordered clockwise on screen (y down); the start pixel is
  // the top-most, left-most one so the search may begin at north-east.
  auto next_move = [&](int x, int y, int search_from) {
    for (int i = 0; i < 8; ++i) {
      const int d = (search_from + i) % 8;
      if (detail::set_at(component, x + detail::kDx[d], y + detail::kDy[d])) return d;
    }
    return -1;
  };

  const int first = next_move(sx, sy, 7);
  if (first < 0) return 0.0;

  double length = 0.0;
  int x = sx;
  int y = sy;
  int d = first;
  const std::size_t limit = 8 * component.size() + 8;
  for (std::size_t steps = 0; steps < limit; ++steps) {
    x += detail::kDx[d];
    y += detail::kDy[d];
    length += (d % 2 == 0) ? 1.0 : std::numbers::sqrt2;
    const int search_from = (d % 2 == 0) ? (d + 7) % 8 : (d + 6) % 8;
    const int nd = next_move(x, y, search_from);
    if (x == sx && y == sy && nd == first) break;
    d = nd;
  }
  return length;
}

/// Convex hull (counter-clockwise, no collinear vertices) by monotone chain.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

namespace detail {

inline long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline long long ceil_div(long long a, long long b) { return -floor_div(-a, b); }

}  // namespace detail

/// Number of integer lattice points inside or on a convex polygon given in
/// counter-clockwise order (degenerate hulls of 1 or 2 points allowed).
inline std::size_t lattice_points_in_hull(const std::vector<Point>& hull) {
  if (hull.empty()) return 0;
  long long ymin = hull[0].y, ymax = hull[0].y, xmin = hull[0].x, xmax = hull[0].x;
  for (const Point& p : hull) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  std::size_t total = 0;
  const std::size_t n = hull.size();
  for (long long y = ymin; y <= ymax; ++y) {
    long long lo = xmin;
    long long hi = xmax;
    for (std::size_t i = 0; i < n && lo <= hi && n > 1; ++i) {
      const Point& a = hull[i];
      const Point& b = hull[(i + 1) % n];
      const long long dx = b.x - a.x;
      const long long dy = b.y - a.y;
      // inside iff dx * (y - a.y) - dy * (x - a.x) >= 0
      const long long rhs = dx * (y - a.y);
      if (dy == 0) {
        if (rhs < 0) hi = lo - 1;
      } else if (dy > 0) {
        hi = std::min(hi, a.x + detail::floor_div(rhs, dy));
      } else {
        lo = std::max(lo, a.x + detail::ceil_div(rhs, dy));
      }
    }
    if (lo <= hi) total += static_cast<std::size_t>(hi - lo + 1);
  }
  return total;
}

namespace detail {

inline Region make_region(int image_width, int image_height, const std::vector<std::size_t>& pixels) {
  Region r;
  r.image_width = image_width;
  r.image_height = image_height;
  int x0 = image_width, y0 = image_height, x1 = -1, y1 = -1;
  double sx = 0.0, sy = 0.0;
  for (std::size_t idx : pixels) {
    const int x = static_cast<int>(idx % static_cast<std::size_t>(image_width));
    const int y = static_cast<int>(idx / static_cast<std::size_t>(image_width));
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
    sx += x;
    sy += y;
  }
  r.bbox = {x0, y0, x1, y1};
  r.local = BinaryMask(r.bbox.width(), r.bbox.height());
  for (std::size_t idx : pixels) {
    const int x = static_cast<int>(idx % static_cast<std::size_t>(image_width));
    const int y = static_cast<int>(idx / static_cast<std::size_t>(image_width));
    r.local(x - x0, y - y0) = 1;
  }
  r.area = pixels.size();
  r.centroid_x = sx / static_cast<double>(r.area);
  r.centroid_y = sy / static_cast<double>(r.area);
  r.perimeter = chain_code_perimeter(r.local);

  // Row extremes are enough to determine the hull.
  std::vector<Point> extremes;
  for (int y = 0; y < r.local.height(); ++y) {
    auto row = r.local.row(y);
    int left = -1, right = -1;
    for (int x = 0; x < r.local.width(); ++x)
      if (row[x]) {
        if (left < 0) left = x;
        right = x;
      }
    if (left >= 0) {
      extremes.push_back({left + x0, y + y0});
      extremes.push_back({right + x0, y + y0});
    }
  }
  r.convex_area = lattice_points_in_hull(convex_hull(std::move(extremes)));
  return r;
}

}  // namespace detail

/// Labels 8-connected foreground components in raster-scan order of their
/// first pixel. Components smaller than `min_area` are skipped before their
/// geometry is computed.
inline std::vector<Region> connected_components(const BinaryMask& mask, std::size_t min_area = 0) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<Region> regions;
  std::vector<std::size_t> pixels;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || seen[start]) continue;
    pixels.clear();
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      pixels.push_back(idx);
      const int x = static_cast<int>(idx % static_cast<std::size_t>(w));
      const int y = static_cast<int>(idx / static_cast<std::size_t>(w));
      for (int d = 0; d < 8; ++d) {
        const int nx = x + detail::kDx[d];
        const int ny = y + detail::kDy[d];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t n = mask.index(nx, ny);
        if (mask[n] && !seen[n]) {
          seen[n] = 1;
          stack.push_back(n);
        }
      }
    }
    if (pixels.size() < min_area) continue;
    regions.push_back(detail::make_region(w, h, pixels));
  }
  return regions;
}

/// Sets every background pixel that is not 4-connected to the image border
/// through background.
inline BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> outside(mask.size(), 0);
  std::vector<std::size_t> stack;
  auto seed = [&](int x, int y) {
    const std::size_t i = mask.index(x, y);
    if (!mask[i] && !outside[i]) {
      outside[i] = 1;
      stack.push_back(i);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  constexpr std::array<int, 4> dx4 = {1, -1, 0, 0};
  constexpr std::array<int, 4> dy4 = {0, 0, 1, -1};
  while (!stack.empty()) {
    const std::size_t idx = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(idx % static_cast<std::size_t>(w));
    const int y = static_cast<int>(idx / static_cast<std::size_t>(w));
    for (int d = 0; d < 4; ++d) {
      const int nx = x + dx4[d];
      const int ny = y + dy4[d];
      if (nx >= 0 && ny >= 0 && nx < w && ny < h) seed(nx, ny);
    }
  }
  BinaryMask out(w, h);
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = (mask[i] || !outside[i]) ? 1 : 0;
  return out;
}

}  // namespace lesionseg
