#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lesionseg/errors.hpp"

namespace lesionseg {

/// Row-major 2-D raster of T. Coordinates are (x, y) with y growing downward.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)), fill) {
    if (width < 0 || height < 0) throw Error("raster dimensions must be non-negative");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool same_shape(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }
  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const T> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  bool operator==(const Raster&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// One real-valued channel plane.
using Plane = Raster<double>;

/// Boolean raster stored as 0/1 bytes.
using BinaryMask = Raster<std::uint8_t>;

inline std::size_t count(const BinaryMask& mask) {
  return static_cast<std::size_t>(std::count_if(mask.pixels().begin(), mask.pixels().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

inline BinaryMask complement(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 0 : 1;
  return out;
}

/// True when every set pixel of `inner` is also set in `outer`.
inline bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
  if (!inner.same_shape(outer)) throw DimensionMismatch("is_subset: mask dimensions differ");
  for (std::size_t i = 0; i < inner.size(); ++i)
    if (inner[i] && !outer[i]) return false;
  return true;
}

/// Three-plane RGB raster holding real values, nominally in [0, 255].
struct RgbImage {
  std::array<Plane, 3> planes;

  RgbImage() = default;
  RgbImage(int width, int height, double fill = 0.0)
      : planes{Plane(width, height, fill), Plane(width, height, fill), Plane(width, height, fill)} {}

  int width() const noexcept { return planes[0].width(); }
  int height() const noexcept { return planes[0].height(); }

  Plane& red() noexcept { return planes[0]; }
  Plane& green() noexcept { return planes[1]; }
  Plane& blue() noexcept { return planes[2]; }
  const Plane& red() const noexcept { return planes[0]; }
  const Plane& green() const noexcept { return planes[1]; }
  const Plane& blue() const noexcept { return planes[2]; }

  std::array<double, 3> at(int x, int y) const noexcept {
    return {planes[0](x, y), planes[1](x, y), planes[2](x, y)};
  }
  void set(int x, int y, const std::array<double, 3>& rgb) noexcept {
    for (int c = 0; c < 3; ++c) planes[c](x, y) = rgb[c];
  }

  bool operator==(const RgbImage&) const = default;
};

/// Per-channel sums over all pixels.
inline std::array<double, 3> channel_sums(const RgbImage& img) {
  std::array<double, 3> sums{};
  for (int c = 0; c < 3; ++c)
    for (double v : img.planes[c].pixels()) sums[c] += v;
  return sums;
}

/// Geometry of the square padding applied before resizing. Odd padding puts
/// the extra row/column on the bottom/right.
struct PadInfo {
  int original_width = 0;
  int original_height = 0;
  int pad_left = 0;
  int pad_top = 0;
  int side = 0;

  static PadInfo for_size(int width, int height) {
    if (width < 1 || height < 1) throw Error("pad_to_square: image must be at least 1x1");
    PadInfo info;
    info.original_width = width;
    info.original_height = height;
    info.side = std::max(width, height);
    info.pad_left = (info.side - width) / 2;
    info.pad_top = (info.side - height) / 2;
    return info;
  }

  bool operator==(const PadInfo&) const = default;
};

template <typename T>
Raster<T> pad_to_square(const Raster<T>& src, T fill = T{}) {
  const PadInfo info = PadInfo::for_size(src.width(), src.height());
  if (info.side == src.width() && info.side == src.height()) return src;
  Raster<T> out(info.side, info.side, fill);
  for (int y = 0; y < src.height(); ++y) {
    auto in = src.row(y);
    std::copy(in.begin(), in.end(), out.row(y + info.pad_top).begin() + info.pad_left);
  }
  return out;
}

inline RgbImage pad_to_square(const RgbImage& img) {
  RgbImage out;
  for (int c = 0; c < 3; ++c) out.planes[c] = pad_to_square(img.planes[c], 0.0);
  return out;
}

/// Removes the padding described by `info` from a side x side raster.
template <typename T>
Raster<T> crop_padding(const Raster<T>& square, const PadInfo& info) {
  if (square.width() != info.side || square.height() != info.side)
    throw DimensionMismatch("crop_padding: raster is not side x side");
  Raster<T> out(info.original_width, info.original_height);
  for (int y = 0; y < info.original_height; ++y) {
    auto in = square.row(y + info.pad_top);
    std::copy(in.begin() + info.pad_left, in.begin() + info.pad_left + info.original_width, out.row(y).begin());
  }
  return out;
}

namespace detail {

// Pixel-center aligned source coordinate, clamped to the valid range.
inline double source_coordinate(int dst_index, int src_size, int dst_size) {
  const double s = (dst_index + 0.5) * static_cast<double>(src_size) / dst_size - 0.5;
  return std::clamp(s, 0.0, static_cast<double>(src_size - 1));
}

// Nearest source index for pixel-center aligned resampling.
inline int nearest_source_index(int dst_index, int src_size, int dst_size) {
  const auto s = static_cast<long long>(std::floor((dst_index + 0.5) * src_size / static_cast<double>(dst_size)));
  return static_cast<int>(std::clamp<long long>(s, 0, src_size - 1));
}

}  // namespace detail

inline Plane resize_bilinear(const Plane& src, int target_width, int target_height) {
  if (src.width() < 1 || src.height() < 1 || target_width < 1 || target_height < 1)
    throw Error("resize_bilinear: dimensions must be at least 1");
  if (src.width() == target_width && src.height() == target_height) return src;

  struct Tap {
    int i0, i1;
    double frac;
  };
  auto taps = [](int src_size, int dst_size) {
    std::vector<Tap> out(static_cast<std::size_t>(dst_size));
    for (int i = 0; i < dst_size; ++i) {
      const double s = detail::source_coordinate(i, src_size, dst_size);
      const int i0 = static_cast<int>(std::floor(s));
      out[static_cast<std::size_t>(i)] = {i0, std::min(i0 + 1, src_size - 1), s - i0};
    }
    return out;
  };
  const auto xt = taps(src.width(), target_width);
  const auto yt = taps(src.height(), target_height);

  Plane out(target_width, target_height);
  for (int y = 0; y < target_height; ++y) {
    const Tap& ty = yt[static_cast<std::size_t>(y)];
    auto r0 = src.row(ty.i0);
    auto r1 = src.row(ty.i1);
    auto dst = out.row(y);
    for (int x = 0; x < target_width; ++x) {
      const Tap& tx = xt[static_cast<std::size_t>(x)];
      const double top = r0[tx.i0] + (r0[tx.i1] - r0[tx.i0]) * tx.frac;
      const double bottom = r1[tx.i0] + (r1[tx.i1] - r1[tx.i0]) * tx.frac;
      dst[x] = top + (bottom - top) * ty.frac;
    }
  }
  return out;
}

inline RgbImage resize_bilinear(const RgbImage& img, int target_width, int target_height) {
  RgbImage out;
  for (int c = 0; c < 3; ++c) out.planes[c] = resize_bilinear(img.planes[c], target_width, target_height);
  return out;
}

/// Nearest-neighbour resize for masks (pixel-center aligned).
inline BinaryMask resize_nearest(const BinaryMask& src, int target_width, int target_height) {
  if (src.width() < 1 || src.height() < 1 || target_width < 1 || target_height < 1)
    throw Error("resize_nearest: dimensions must be at least 1");
  if (src.width() == target_width && src.height() == target_height) return src;
  std::vector<int> xs(static_cast<std::size_t>(target_width));
  for (int x = 0; x < target_width; ++x)
    xs[static_cast<std::size_t>(x)] = detail::nearest_source_index(x, src.width(), target_width);
  BinaryMask out(target_width, target_height);
  for (int y = 0; y < target_height; ++y) {
    auto in = src.row(detail::nearest_source_index(y, src.height(), target_height));
    auto dst = out.row(y);
    for (int x = 0; x < target_width; ++x) dst[x] = in[xs[static_cast<std::size_t>(x)]];
  }
  return out;
}

/// Clamps and rounds a real plane to 8-bit values.
inline std::uint8_t to_byte(double v) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v));
}

}  // namespace lesionseg
