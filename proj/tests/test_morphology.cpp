#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lesionseg/morphology.hpp"
#include "support.hpp"

using namespace lesionseg;
using testsupport::naive_dilate;
using testsupport::naive_erode;

TEST(Disk, LatticePointCounts) {
  EXPECT_EQ(disk(0).size(), 1u);
  EXPECT_EQ(disk(1).size(), 5u);
  EXPECT_EQ(disk(3).size(), 29u);
  EXPECT_EQ(disk(5).size(), 81u);
  for (int r : {2, 7, 10, 14, 30}) EXPECT_EQ(disk(r).size(), testsupport::disk_offsets(r).size());
}

TEST(Disk, IsSymmetricAndContainsOrigin) {
  const auto se = disk(4);
  const auto& offs = se.offsets();
  EXPECT_NE(std::find(offs.begin(), offs.end(), Offset{0, 0}), offs.end());
  for (const Offset& o : offs) EXPECT_NE(std::find(offs.begin(), offs.end(), Offset{-o.dx, -o.dy}), offs.end());
  EXPECT_THROW(disk(-1), Error);
}

TEST(StructuringElement, RequiresOrigin) {
  EXPECT_THROW(StructuringElement(std::vector<Offset>{{1, 0}}), Error);
}

TEST(BinaryMorphology, DilatingOnePixelGivesTheDisk) {
  BinaryMask m(21, 21);
  m(10, 10) = 1;
  const BinaryMask d = dilate(m, disk(3));
  EXPECT_EQ(count(d), 29u);
  for (auto [dx, dy] : testsupport::disk_offsets(3)) EXPECT_TRUE(d(10 + dx, 10 + dy));
}

TEST(BinaryMorphology, ExtremalFixedPoints) {
  const BinaryMask full(40, 30, 1), empty(40, 30, 0);
  for (int r : {1, 3, 10}) {
    EXPECT_EQ(close(full, disk(r)), full);
    EXPECT_EQ(open(full, disk(r)), full);
    EXPECT_EQ(open(empty, disk(r)), empty);
    EXPECT_EQ(close(empty, disk(r)), empty);
  }
}

TEST(BinaryMorphology, MatchesNaiveReference) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const BinaryMask m = testsupport::random_mask(rng, 48, 40, 0.3 + 0.01 * trial);
    for (int r : {1, 2, 3, 5}) {
      const auto se = disk(r);
      ASSERT_EQ(dilate(m, se), naive_dilate(m, r));
      ASSERT_EQ(erode(m, se), naive_erode(m, r));
      ASSERT_EQ(open(m, se), naive_dilate(naive_erode(m, r), r));
      ASSERT_EQ(close(m, se), naive_erode(naive_dilate(m, r), r));
    }
  }
}

TEST(BinaryMorphology, AsymmetricElementUsesMinkowskiDefinitions) {
  // Offsets {(0,0), (1,0), (0,2)}: dilation shifts by +b, erosion looks at p+b.
  const StructuringElement se(std::vector<Offset>{{0, 0}, {1, 0}, {0, 2}});
  BinaryMask m(8, 8);
  m(3, 3) = 1;
  const BinaryMask d = dilate(m, se);
  EXPECT_EQ(count(d), 3u);
  EXPECT_TRUE(d(3, 3) && d(4, 3) && d(3, 5));
  BinaryMask block(8, 8);
  for (int y = 2; y <= 5; ++y)
    for (int x = 2; x <= 5; ++x) block(x, y) = 1;
  const BinaryMask e = erode(block, se);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_EQ(e(x, y) != 0, x >= 2 && x <= 4 && y >= 2 && y <= 3) << x << "," << y;
}

TEST(BinaryMorphology, DualityAwayFromBorders) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int r = 1 + trial % 4;
    BinaryMask m = testsupport::random_mask(rng, 50, 50, 0.5);
    for (int y = 0; y < 50; ++y)
      for (int x = 0; x < 50; ++x)
        if (x < r + 1 || y < r + 1 || x >= 50 - r - 1 || y >= 50 - r - 1) m(x, y) = 0;
    const auto se = disk(r);
    const BinaryMask lhs = dilate(m, se);
    const BinaryMask rhs = complement(erode(complement(m), se));
    // Compare where the window stays inside the image.
    for (int y = r; y < 50 - r; ++y)
      for (int x = r; x < 50 - r; ++x) ASSERT_EQ(lhs(x, y), rhs(x, y));
  }
}

TEST(BinaryMorphology, OpenAndCloseAreIdempotent) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryMask m = testsupport::random_blobs(rng, 60, 60, 6, 2, 9);
    const auto se = disk(1 + trial % 3);
    const BinaryMask o = open(m, se), c = close(m, se);
    EXPECT_EQ(open(o, se), o);
    EXPECT_EQ(close(c, se), c);
  }
}

TEST(BinaryMorphology, Monotonicity) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryMask a = testsupport::random_mask(rng, 40, 40, 0.4);
    BinaryMask b = a;
    const BinaryMask extra = testsupport::random_mask(rng, 40, 40, 0.2);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] |= extra[i];
    const auto se = disk(2);
    EXPECT_TRUE(is_subset(dilate(a, se), dilate(b, se)));
    EXPECT_TRUE(is_subset(erode(a, se), erode(b, se)));
  }
}

TEST(GrayMorphology, MatchesNaiveReference) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const Plane p = testsupport::random_image(rng, 37, 29).planes[0];
    for (int r : {1, 2, 4}) {
      const auto se = disk(r);
      ASSERT_EQ(dilate(p, se), testsupport::naive_gray(p, r, true));
      ASSERT_EQ(erode(p, se), testsupport::naive_gray(p, r, false));
    }
  }
}

TEST(GrayMorphology, ConstantPlaneIsFixed) {
  const Plane p(30, 20, 42.0);
  EXPECT_EQ(close(p, disk(5)), p);
  EXPECT_EQ(open(p, disk(5)), p);
}

TEST(Median3x3, ConstantAndImpulse) {
  const Plane c(9, 7, 5.5);
  EXPECT_EQ(median3x3(c), c);
  Plane z(9, 7, 0.0);
  z(4, 3) = 255.0;
  EXPECT_EQ(median3x3(z), Plane(9, 7, 0.0));
  Plane corner(9, 7, 0.0);
  corner(0, 0) = 255.0;  // replicated 4 times in the corner window
  EXPECT_EQ(median3x3(corner), Plane(9, 7, 0.0));
}

TEST(Median3x3, MatchesSortReference) {
  std::mt19937_64 rng(16);
  const Plane p = testsupport::random_image(rng, 32, 32).planes[0];
  const Plane m = median3x3(p);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      std::vector<double> w;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) w.push_back(p(std::clamp(x + dx, 0, 31), std::clamp(y + dy, 0, 31)));
      std::sort(w.begin(), w.end());
      ASSERT_EQ(m(x, y), w[4]);
    }
}
