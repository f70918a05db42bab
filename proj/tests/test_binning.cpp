#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mmcgp/binning.hpp"
#include "mmcgp/errors.hpp"

using namespace mmcgp;

TEST(Binning, RejectsBadRanges) {
  EXPECT_THROW(Binning(1, 1, 3), ArgumentError);
  EXPECT_THROW(Binning(2, 1, 3), ArgumentError);
  EXPECT_THROW(Binning(0, 1, 0), ArgumentError);
  EXPECT_THROW(Binning(0, INFINITY, 3), ArgumentError);
}

TEST(BinIndex, UnitWidthRange) {
  const Binning b(-1, 54, 55);
  EXPECT_DOUBLE_EQ(b.width(), 1.0);
  EXPECT_EQ(bin_index(b, -1.0), 0);
  EXPECT_EQ(bin_index(b, 0.0), 1);
  EXPECT_EQ(bin_index(b, 54.0), 54);
  EXPECT_EQ(bin_index(b, 54.0001), std::nullopt);
  EXPECT_EQ(bin_index(b, -1.0000001), std::nullopt);
}

TEST(BinIndex, NonFiniteThrows) {
  const Binning b(0, 1, 4);
  EXPECT_THROW(bin_index(b, std::nan("")), ArgumentError);
  EXPECT_THROW(bin_index(b, INFINITY), ArgumentError);
}

TEST(BinIndex, PartitionAndCenters) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_real_distribution<double> u(-100, 100);
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    const int m = 1 + static_cast<int>(rng() % 97);
    const Binning b(lo, hi, m);
    for (int i = 0; i < m; ++i) EXPECT_EQ(bin_index(b, b.center(i)), i);
    for (int k = 0; k < 200; ++k) {
      const double y = std::uniform_real_distribution<double>(lo, hi)(rng);
      const auto i = bin_index(b, y);
      ASSERT_TRUE(i.has_value());
      EXPECT_LE(b.lower_edge(*i), y);
      EXPECT_TRUE(y < b.upper_edge(*i) || (*i == m - 1 && y == hi));
    }
    // Every interior edge belongs to the bin on its right.
    for (int i = 1; i < m; ++i) {
      const auto j = bin_index(b, b.lower_edge(i));
      ASSERT_TRUE(j.has_value());
      EXPECT_LE(b.lower_edge(*j), b.lower_edge(i));
      EXPECT_GT(b.upper_edge(*j), b.lower_edge(i));
    }
  }
}

TEST(Tally, Examples) {
  const Binning b(0, 1, 2);
  const Histogram empty = tally(b, {});
  EXPECT_EQ(empty.total, 0u);
  EXPECT_EQ(empty.counts, (std::vector<std::uint64_t>{0, 0}));

  const std::vector<double> ys{0.1, 0.6, 0.7};
  const Histogram h = tally(b, ys);
  EXPECT_EQ(h.counts, (std::vector<std::uint64_t>{1, 2}));

  const std::vector<double> zs{-5, 0.1, 2};
  const Histogram o = tally(b, zs);
  EXPECT_EQ(o.counts, (std::vector<std::uint64_t>{1, 0}));
  EXPECT_EQ(o.overflow_low, 1u);
  EXPECT_EQ(o.overflow_high, 1u);
  EXPECT_EQ(o.total, 3u);
}

TEST(Tally, PermutationInvariantAndConserving) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.5, 1.0);
  std::vector<double> ys(2000);
  for (double& y : ys) y = n(rng);
  const Binning b(-1, 2, 17);
  const Histogram h = tally(b, ys);
  std::shuffle(ys.begin(), ys.end(), rng);
  EXPECT_EQ(tally(b, ys), h);
  std::uint64_t s = h.overflow_low + h.overflow_high;
  for (auto c : h.counts) s += c;
  EXPECT_EQ(s, h.total);
  EXPECT_EQ(h.total, ys.size());
}
