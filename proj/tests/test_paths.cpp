#include <gtest/gtest.h>

#include <sstream>

#include "rosen/paths.hpp"
#include "rosen/spectral.hpp"

using namespace rosen;

TEST(Paths, StreamingMatchesBatchedRosenblatt) {
  const HurstPair p{0.6, 0.8};
  const auto dom = TruncatedDomain::graded(16.0, 1.0, 48, 0.8, 4);
  const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto a = simulate_rosenblatt(p, times, dom, 300, 7);
  const auto b = simulate_rosenblatt_streaming(p, times, dom, 300, 7);
  ASSERT_EQ(a.values.rows(), b.values.rows());
  EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + a.values.cwiseAbs().maxCoeff()));
}

TEST(Paths, StreamingMatchesBatchedMultifractional) {
  const auto prof = HurstProfile::affine(0.6, 0.1, 0.7, 0.05, 1.0, 0.95);
  const auto dom = TruncatedDomain::graded(16.0, 1.0, 48, 0.8, 4);
  const std::vector<double> times{0.125, 0.5, 1.0};
  const auto a = simulate_multifractional(prof, times, dom, 200, 3);
  const auto b = simulate_multifractional_streaming(prof, times, dom, 200, 3);
  EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + a.values.cwiseAbs().maxCoeff()));
}

TEST(Paths, StartsAtZeroAndIsDeterministic) {
  const HurstPair p{0.7, 0.7};
  const auto dom = TruncatedDomain::graded(8.0, 1.0, 32, 0.8, 4);
  const std::vector<double> times{0.0, 0.5, 1.0};
  const auto a = simulate_rosenblatt(p, times, dom, 50, 11);
  const auto b = simulate_rosenblatt(p, times, dom, 50, 11);
  const auto c = simulate_rosenblatt(p, times, dom, 50, 12);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_EQ(a.values.col(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Paths, IncrementMomentsMatchKernelNorm) {
  const HurstPair p{0.65, 0.75};
  const auto dom = TruncatedDomain::graded(16.0, 1.0, 40, 0.8, 4);
  const std::vector<double> times{0.25, 1.0};
  const auto ens = simulate_rosenblatt(p, times, dom, 20000, 5);
  const auto m = increment_moments(ens, 0, 1, {2, 4});
  const auto inc = eigen_decompose(discretize_increment(p, 0.25, 1.0, dom));
  // second and fourth moments of sum lambda_k (xi_k^2 - 1)
  const double s2 = inc.sum_power(2), s4 = inc.sum_power(4);
  const double m2 = 2.0 * s2 + 2.0 * inc.residual_mass;
  const double m4 = 12.0 * s2 * s2 + 48.0 * s4;
  EXPECT_NEAR(m[0].value, m2, 4.0 * m[0].se);
  EXPECT_NEAR(m[1].value, m4, 4.0 * m[1].se);
  const auto r = increment_kurtosis_ratio(ens, 0, 1);
  EXPECT_GT(r.value, 3.0 - 4.0 * r.se);
}

TEST(Paths, RejectsBadGrids) {
  const HurstPair p{0.6, 0.8};
  const auto dom = TruncatedDomain::graded(8.0, 1.0, 16, 0.8, 4);
  EXPECT_THROW(simulate_rosenblatt(p, {0.5, 0.25}, dom, 10, 1), ValidationError);
  EXPECT_THROW(simulate_rosenblatt(p, {0.5, 2.0}, dom, 10, 1), ValidationError);
  EXPECT_THROW(simulate_rosenblatt(p, {}, dom, 10, 1), ValidationError);
}

TEST(Paths, CsvWithoutSamplesHasHeaderOnly) {
  const HurstPair p{0.6, 0.8};
  const auto dom = TruncatedDomain::graded(8.0, 1.0, 16, 0.8, 4);
  const auto ens = simulate_rosenblatt_streaming(p, {0.5, 1.0}, dom, 0, 1);
  std::ostringstream os;
  write_paths_csv(os, ens, "meta");
  std::istringstream in(os.str());
  std::string line, last;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    last = line;
  }
  EXPECT_EQ(lines, 4);
  EXPECT_EQ(last, "sample,t=0.5,t=1");
}
