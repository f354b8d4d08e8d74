#include <gtest/gtest.h>

#include <set>

#include "rosen/domain.hpp"
#include "rosen/random.hpp"

using namespace rosen;

namespace {

void expect_valid(const TruncatedDomain& d) {
  ASSERT_GE(d.size(), 1u);
  EXPECT_EQ(d.edges().front(), -d.left_cut());
  EXPECT_EQ(d.edges().back(), d.horizon());
  for (std::size_t j = 0; j < d.size(); ++j) EXPECT_GT(d.width(j), 0.0);
}

}  // namespace

TEST(Domain, Uniform) {
  const auto d = TruncatedDomain::uniform(3.0, 1.0, 40);
  expect_valid(d);
  EXPECT_EQ(d.size(), 40u);
  EXPECT_NEAR(d.width(7), 0.1, 1e-15);
}

TEST(Domain, GradedShape) {
  for (double L : {1.5, 10.0, 1e4, 1e12}) {
    const auto d = TruncatedDomain::graded(L, 1.0, 256);
    expect_valid(d);
    EXPECT_EQ(d.size(), 256u);
    // widths non-increasing toward [0, T], uniform inside
    for (std::size_t j = 0; j + 1 < d.size(); ++j) {
      if (d.right(j) <= 0.0) EXPECT_GE(d.width(j), d.width(j + 1) * (1.0 - 1e-9)) << L << " " << j;
      else EXPECT_NEAR(d.width(j), d.width(j + 1), 1e-12);
      if (d.right(j) < 0.0) EXPECT_LE(d.width(j + 1) / d.width(j), 1.0 + 1e-12);
      if (d.right(j) < 0.0) EXPECT_GE(d.width(j + 1) / d.width(j), 0.9 - 1e-12);
    }
  }
}

TEST(Domain, GradedRejectsTinyLeftCut) { EXPECT_THROW(TruncatedDomain::graded(1e-4, 1.0, 64), ValidationError); }

TEST(Domain, FocusedScaleCovariance) {
  const auto d = TruncatedDomain::focused(1e6, 1.0, 1.0, 1.0 / 1024, 4);
  expect_valid(d);
  std::set<double> e(d.edges().begin(), d.edges().end());
  // edges at 1 - 2^(i/4)/1024: ratios of consecutive distances are 2^(1/4) away from the ends
  for (std::size_t j = 2; j + 3 < d.edges().size(); ++j) {
    const double r = (1.0 - d.edges()[j]) / (1.0 - d.edges()[j + 1]);
    EXPECT_NEAR(r, std::exp2(0.25), 1e-9);
  }
  EXPECT_LT(d.size(), 4u * 31u);
}

TEST(Domain, FocusedInterior) {
  const auto d = TruncatedDomain::focused(100.0, 1.0, 0.5, 0.01, 3);
  expect_valid(d);
  bool has_center = false;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (std::abs(d.left(j) - 0.49) < 1e-12 && std::abs(d.right(j) - 0.51) < 1e-12) has_center = true;
  }
  EXPECT_TRUE(has_center);
}

TEST(Domain, RejectsBadInput) {
  EXPECT_THROW(TruncatedDomain::uniform(-1.0, 1.0, 4), ValidationError);
  EXPECT_THROW(TruncatedDomain::uniform(1.0, 0.0, 4), ValidationError);
  EXPECT_THROW(TruncatedDomain::uniform(1.0, 1.0, 0), ValidationError);
  EXPECT_THROW(TruncatedDomain::from_edges({-1.0, 0.5, 0.5, 1.0}), ValidationError);
}

TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, DeterministicAndDistinct) {
  RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    EXPECT_NE(x, c.normal());
    EXPECT_NE(x, d.normal());
  }
}

TEST(RandomStream, NormalMoments) {
  RandomStream r(1, 0);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(RandomStream, UniformOpenInterval) {
  RandomStream r(9, 9);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
