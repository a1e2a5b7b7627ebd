#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lesionseg/regions.hpp"
#include "support.hpp"

using namespace lesionseg;

namespace {

BinaryMask from_rows(const std::vector<std::string>& rows) {
  BinaryMask m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m(x, y) = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] == '#';
  return m;
}

// Brute-force hull membership, independent of the library's hull code.
std::size_t brute_convex_area(const std::vector<Point>& pts) {
  std::vector<Point> uniq(pts);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  auto cross = [](Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); };
  long long x0 = uniq[0].x, x1 = uniq[0].x, y0 = uniq[0].y, y1 = uniq[0].y;
  for (auto p : uniq) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  // A lattice point q is in the hull iff no line through two input points
  // strictly separates q from every input point.
  std::size_t n = 0;
  for (long long y = y0; y <= y1; ++y)
    for (long long x = x0; x <= x1; ++x) {
      const Point q{x, y};
      bool inside = true;
      for (std::size_t i = 0; i < uniq.size() && inside; ++i)
        for (std::size_t j = 0; j < uniq.size() && inside; ++j) {
          if (i == j) continue;
          const long long cq = cross(uniq[i], uniq[j], q);
          if (cq >= 0) continue;
          bool all_left = true;
          for (auto p : uniq)
            if (cross(uniq[i], uniq[j], p) < 0) {
              all_left = false;
              break;
            }
          if (all_left) inside = false;
        }
      n += inside;
    }
  return n;
}

}  // namespace

TEST(ConnectedComponents, EmptyMaskHasNoRegions) {
  EXPECT_TRUE(connected_components(BinaryMask(10, 10)).empty());
}

TEST(ConnectedComponents, DiagonalNeighboursAreOneRegion) {
  BinaryMask m(5, 5);
  m(1, 1) = 1;
  m(2, 2) = 1;
  const auto regs = connected_components(m);
  ASSERT_EQ(regs.size(), 1u);
  EXPECT_EQ(regs[0].area, 2u);
  EXPECT_DOUBLE_EQ(regs[0].centroid_x, 1.5);
  EXPECT_DOUBLE_EQ(regs[0].centroid_y, 1.5);
}

TEST(ConnectedComponents, PartitionMatchesFloodFill) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMask m = testsupport::random_mask(rng, 40, 30, 0.2 + 0.01 * trial);
    const auto labels = testsupport::flood_labels(m, true);
    const auto regs = connected_components(m);
    const int expected = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
    ASSERT_EQ(static_cast<int>(regs.size()), expected);
    std::size_t total = 0;
    for (std::size_t r = 0; r < regs.size(); ++r) {
      total += regs[r].area;
      std::size_t matched = 0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        const int x = static_cast<int>(i % 40), y = static_cast<int>(i / 40);
        const bool in_ref = labels[i] == static_cast<int>(r) + 1;
        ASSERT_EQ(regs[r].contains(x, y), in_ref);
        matched += in_ref;
      }
      ASSERT_EQ(matched, regs[r].area);
    }
    ASSERT_EQ(total, count(m));
  }
}

TEST(ConnectedComponents, MinAreaDropsSmallRegions) {
  BinaryMask m(20, 20);
  m(0, 0) = 1;
  for (int y = 5; y < 10; ++y)
    for (int x = 5; x < 10; ++x) m(x, y) = 1;
  EXPECT_EQ(connected_components(m).size(), 2u);
  const auto big = connected_components(m, 25);
  ASSERT_EQ(big.size(), 1u);
  EXPECT_EQ(big[0].area, 25u);
  EXPECT_EQ(big[0].to_mask(), [&] {
    BinaryMask b = m;
    b(0, 0) = 0;
    return b;
  }());
}

TEST(ChainCodePerimeter, SmallShapes) {
  const double s2 = std::numbers::sqrt2;
  EXPECT_DOUBLE_EQ(chain_code_perimeter(from_rows({"#"})), 0.0);
  EXPECT_DOUBLE_EQ(chain_code_perimeter(from_rows({"##"})), 2.0);
  EXPECT_DOUBLE_EQ(chain_code_perimeter(from_rows({"#.", ".#"})), 2 * s2);
  EXPECT_DOUBLE_EQ(chain_code_perimeter(from_rows({".#", "#."})), 2 * s2);
  EXPECT_DOUBLE_EQ(chain_code_perimeter(from_rows({"###", "###", "###"})), 8.0);
  EXPECT_DOUBLE_EQ(chain_code_perimeter(from_rows({".#.", "###", ".#."})), 4 * s2);
  EXPECT_DOUBLE_EQ(chain_code_perimeter(from_rows({"#####"})), 8.0);
  EXPECT_DOUBLE_EQ(chain_code_perimeter(from_rows({"#", "#", "#"})), 4.0);
  // L shape: the outward trace cuts the inner corner diagonally, the return
  // trace visits it.
  EXPECT_DOUBLE_EQ(chain_code_perimeter(from_rows({"#..", "#..", "###"})), 6.0 + s2);
}

TEST(ChainCodePerimeter, HolesAreIgnored) {
  EXPECT_DOUBLE_EQ(chain_code_perimeter(from_rows({"###", "#.#", "###"})), 8.0);
  const BinaryMask filled = testsupport::disk_mask(61, 61, 30, 30, 25);
  BinaryMask ring = filled;
  for (int y = 0; y < 61; ++y)
    for (int x = 0; x < 61; ++x)
      if ((x - 30) * (x - 30) + (y - 30) * (y - 30) <= 100) ring(x, y) = 0;
  EXPECT_DOUBLE_EQ(chain_code_perimeter(ring), chain_code_perimeter(filled));
}

TEST(ChainCodePerimeter, SquareIsFourSidesOfNMinusOne) {
  for (int n : {2, 5, 10, 100}) {
    BinaryMask m(n + 4, n + 4);
    for (int y = 2; y < n + 2; ++y)
      for (int x = 2; x < n + 2; ++x) m(x, y) = 1;
    EXPECT_DOUBLE_EQ(chain_code_perimeter(m), 4.0 * (n - 1));
  }
}

TEST(ChainCodePerimeter, DiskIsCloseToCircumference) {
  for (int r : {20, 50, 100}) {
    const BinaryMask m = testsupport::disk_mask(2 * r + 5, 2 * r + 5, r + 2, r + 2, r);
    const double p = chain_code_perimeter(m);
    EXPECT_NEAR(p / (2 * std::numbers::pi * r), 1.0, 0.1) << r;
  }
}

TEST(ConvexArea, MatchesBruteForceOnRandomBlobs) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 25; ++trial) {
    const BinaryMask m = testsupport::random_blobs(rng, 30, 30, 3, 1, 6);
    for (const Region& r : connected_components(m)) {
      std::vector<Point> pts;
      r.for_each_pixel([&](int x, int y) { pts.push_back({x, y}); });
      ASSERT_EQ(r.convex_area, brute_convex_area(pts));
      ASSERT_GE(r.convex_area, r.area);
    }
  }
}

TEST(ConvexArea, KnownShapes) {
  // Convex shapes: hull holds exactly the pixels.
  auto only = [](const BinaryMask& m) { return connected_components(m).at(0); };
  const Region sq = only(from_rows({"####", "####", "####"}));
  EXPECT_EQ(sq.convex_area, 12u);
  const Region l = only(from_rows({"#..", "#..", "###"}));
  EXPECT_EQ(l.area, 5u);
  EXPECT_EQ(l.convex_area, 6u);  // hull triangle adds the (1,1) centre
  const Region one = only(from_rows({"#"}));
  EXPECT_EQ(one.convex_area, 1u);
  const Region diag = only(from_rows({"#..", ".#.", "..#"}));
  EXPECT_EQ(diag.convex_area, 3u);
}

TEST(FillHoles, AnnulusBecomesDisk) {
  const BinaryMask outer = testsupport::disk_mask(80, 80, 40, 40, 30);
  BinaryMask ring = outer;
  for (int y = 0; y < 80; ++y)
    for (int x = 0; x < 80; ++x)
      if ((x - 40) * (x - 40) + (y - 40) * (y - 40) <= 15 * 15) ring(x, y) = 0;
  EXPECT_EQ(fill_holes(ring), outer);
}

TEST(FillHoles, MaskWithoutHolesIsUnchanged) {
  const BinaryMask m = testsupport::disk_mask(50, 50, 25, 25, 10);
  EXPECT_EQ(fill_holes(m), m);
}

TEST(FillHoles, DiagonalGapKeepsBackgroundInside) {
  // The inside pixel touches the outside only diagonally; 4-connected
  // background makes it a hole.
  const BinaryMask m = from_rows({".....", ".##..", ".#.#.", "..##.", "....."});
  BinaryMask expected = m;
  expected(2, 2) = 1;
  EXPECT_EQ(fill_holes(m), expected);
}

TEST(FillHoles, MatchesFloodFillOracleAndIsIdempotent) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    BinaryMask m = testsupport::random_blobs(rng, 64, 48, 5, 4, 12);
    const BinaryMask punch = testsupport::random_mask(rng, 64, 48, 0.08);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (punch[i]) m[i] = 0;
    const BinaryMask f = fill_holes(m);
    ASSERT_EQ(f, testsupport::naive_fill_holes(m));
    ASSERT_TRUE(is_subset(m, f));
    ASSERT_EQ(fill_holes(f), f);
  }
}
