#include <gtest/gtest.h>

#include "rosen/chaos.hpp"
#include "rosen/spectral.hpp"
#include "rosen/stats.hpp"

using namespace rosen;

namespace {

const TruncatedDomain& test_domain() {
  static const auto d = TruncatedDomain::graded(100.0, 1.0, 160);
  return d;
}

const EigenSpectrum& rosenblatt_spectrum() {
  static const auto s = eigen_decompose(discretize_kernel({0.6, 0.8}, 1.0, test_domain()));
  return s;
}

}  // namespace

TEST(Eigen, RankOneZeroedDiagonal) {
  const auto d = TruncatedDomain::graded(5.0, 1.0, 64);
  Eigen::VectorXd a(64);
  for (int j = 0; j < 64; ++j) a[j] = std::exp(-std::abs(d.midpoint(static_cast<std::size_t>(j))));
  const auto spec = eigen_decompose(symmetric_tensor(d, a, a), 64);
  const Eigen::VectorXd s = a.array() * Eigen::Map<const Eigen::VectorXd>(d.widths().data(), 64).array().sqrt();
  const double norm = s.squaredNorm(), pert = s.array().square().maxCoeff();
  // Weyl: zeroing the diagonal moves each eigenvalue of s s^T by at most max s_j^2
  EXPECT_NEAR(spec.lambdas[0], norm, pert);
  for (std::size_t k = 1; k < spec.lambdas.size(); ++k) EXPECT_LE(std::abs(spec.lambdas[k]), pert + 1e-12);
}

TEST(Eigen, OrderedByMagnitudeAndMassIdentity) {
  const auto km = discretize_kernel({0.7, 0.9}, 1.0, test_domain());
  for (std::size_t rank : {0u, 5u, 40u, 160u}) {
    const auto s = eigen_decompose(km, rank);
    for (std::size_t k = 1; k < s.lambdas.size(); ++k) EXPECT_GE(std::abs(s.lambdas[k - 1]), std::abs(s.lambdas[k]));
    EXPECT_NEAR((s.sum_power(2) + s.residual_mass) / kernel_l2_norm_sq(km), 1.0, 1e-8);
  }
}

TEST(Eigen, DefaultRankRule) {
  const auto s = rosenblatt_spectrum();
  EXPECT_LE(s.truncation_rank, 256u);
  for (double l : s.lambdas) EXPECT_GT(std::abs(l), 1e-6 * std::abs(s.lambdas.front()));
}

TEST(Eigen, LeadingEigenvaluesPositiveAndConverging) {
  const HurstPair p{0.6, 0.8};
  std::vector<EigenSpectrum> s;
  for (std::size_t M : {128u, 256u, 512u}) s.push_back(eigen_decompose(discretize_kernel(p, 1.0, TruncatedDomain::graded(100.0, 1.0, M))));
  for (int k = 0; k < 3; ++k) {
    for (const auto& x : s) EXPECT_GT(x.lambdas[k], 0.0);
    const double d1 = s[1].lambdas[k] - s[0].lambdas[k], d2 = s[2].lambdas[k] - s[1].lambdas[k];
    std::printf("lambda_%d: M=128 %.6g  M=256 %.6g  M=512 %.6g\n", k + 1, s[0].lambdas[k], s[1].lambdas[k], s[2].lambdas[k]);
    // successive changes shrink; the a_kk = 0 loss decays like w^(H1+H2-1)
    EXPECT_LT(std::abs(d2), std::abs(d1));
    EXPECT_NEAR(s[2].lambdas[k] / s[1].lambdas[k], 1.0, 0.1);
  }
  EXPECT_NEAR(s[2].lambdas[0] / s[1].lambdas[0], 1.0, 0.02);
}

TEST(CharFunction, ZeroIsOne) {
  const auto cf = char_function(rosenblatt_spectrum(), 0.0);
  EXPECT_EQ(cf.value, std::complex<double>(1.0, 0.0));
  const auto mb = char_modulus_bound(rosenblatt_spectrum(), 0.0);
  EXPECT_EQ(mb.modulus, 1.0);
  EXPECT_EQ(mb.bound, 1.0);
}

TEST(CharFunction, SingleEigenvalueModulus) {
  const auto s = spectrum_from_values({0.7});
  for (double a : {-3.0, -0.2, 0.5, 10.0}) {
    const double m = std::abs(char_function(s, a).value);
    EXPECT_NEAR(std::pow(m, 4), 1.0 / (1.0 + 4.0 * a * a * 0.49), 1e-14);
  }
}

TEST(CharFunction, ModulusIdentity) {
  const auto& s = rosenblatt_spectrum();
  for (double a = -5.0; a <= 5.0; a += 0.25) {
    const double m = std::abs(char_function(s, a).value);
    const double exact = char_modulus_bound(s, a).modulus;
    EXPECT_NEAR(m / exact, 1.0, 1e-12);
  }
}

TEST(CharFunction, TailLogBound) {
  // |-iy - log(1-2iy)/2| <= y^2 for real y, the bound behind the tail error estimate
  for (double y = 1e-6; y < 1e4; y *= 1.1) {
    const std::complex<double> v = std::complex<double>(0.0, -y) - 0.5 * std::log(std::complex<double>(1.0, -2.0 * y));
    EXPECT_LE(std::abs(v), y * y * (1.0 + 1e-9));
  }
}

TEST(CharFunction, TailBoundCoversTruncation) {
  const auto km = discretize_kernel({0.6, 0.8}, 1.0, test_domain());
  const auto full = eigen_decompose(km, km.size());
  const auto cut = eigen_decompose(km, 8);
  for (double a : {0.01, 0.05, 0.2}) {
    const auto c = char_function(cut, a);
    EXPECT_LE(std::abs(c.value - char_function(full, a).value), c.tail_bound + 1e-15);
  }
}

TEST(CharFunction, MatchesEmpiricalStandardized) {
  const auto& s = rosenblatt_spectrum();
  const std::size_t n = 100000;
  const auto xs = spectral_sample(s, n, 31);
  const double sd = std::sqrt(cumulant(s, 2));
  for (double a : {1.0}) {
    EXPECT_LE(std::abs(char_function(s, a).value - empirical_cf(xs, a)), 4.0 / std::sqrt(n));
    EXPECT_LE(std::abs(char_function(s, a / sd).value - empirical_cf(xs, a / sd)), 4.0 / std::sqrt(n));
  }
}

TEST(ModulusBound, DominatesModulus) {
  const auto& s = rosenblatt_spectrum();
  for (double a = 0.0; a < 1e3; a = a * 1.5 + 0.01) {
    const auto mb = char_modulus_bound(s, a);
    EXPECT_LE(mb.modulus, mb.bound * (1.0 + 1e-12));
  }
}

TEST(ModulusBound, NewtonMatchesDirectRecurrence) {
  const auto& s = rosenblatt_spectrum();
  double e1 = 0, e2 = 0, e3 = 0;
  for (double l : s.lambdas) {
    const double x = l * l;
    e3 += e2 * x;
    e2 += e1 * x;
    e1 += x;
  }
  const auto e = squared_elementary_symmetric(s);
  EXPECT_NEAR(e.e1 / e1, 1.0, 1e-12);
  EXPECT_NEAR(e.e2 / e2, 1.0, 1e-9);
  EXPECT_NEAR(e.e3 / e3, 1.0, 1e-6);
}

TEST(ModulusBound, TailExponentThreeHalves) {
  const auto& s = rosenblatt_spectrum();
  std::vector<double> x, y;
  for (double a = 1e2; a <= 1e4 * 1.0001; a *= std::sqrt(10.0)) {
    x.push_back(std::log(a));
    y.push_back(std::log(char_modulus_bound(s, a).bound));
  }
  EXPECT_NEAR(weighted_linear_fit(x, y).slope, -1.5, 0.05);
}

TEST(SpectralSample, ZeroSpectrum) {
  const auto s = spectrum_from_values({0.0, 0.0});
  for (double v : spectral_sample(s, 100, 1)) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(spectral_sample(s, 0, 1), ValidationError);
}

TEST(SpectralSample, Moments) {
  const auto& s = rosenblatt_spectrum();
  const std::size_t n = 100000;
  const auto xs = spectral_sample(s, n, 5);
  const double k2 = cumulant(s, 2), k4 = cumulant(s, 4);
  EXPECT_NEAR(sample_mean(xs), 0.0, 3.0 * std::sqrt(k2 / n));
  EXPECT_NEAR(sample_variance(xs), k2, 3.0 * std::sqrt((k4 + 2.0 * k2 * k2) / n));
  EXPECT_EQ(xs, spectral_sample(s, n, 5));
}

TEST(SpectralSample, TwoRouteKolmogorovSmirnov) {
  const auto km = discretize_kernel({0.6, 0.8}, 1.0, test_domain());
  const auto spec = eigen_decompose(km);
  const auto chaos = double_integral_ensemble(km, 10000, 101);
  const auto spectral = spectral_sample(spec, 10000, 202);
  const auto r = ks_test(chaos, spectral);
  EXPECT_NEAR(r.critical, 0.02302, 1e-4);
  EXPECT_TRUE(r.pass) << r.distance;
}

TEST(Cumulants, Basics) {
  const auto& s = rosenblatt_spectrum();
  EXPECT_NEAR(cumulant(s, 2), 2.0 * s.sum_power(2), 0.0);
  EXPECT_NEAR(cumulant(spectrum_from_values({0.3}), 3), 8.0 * 0.027, 1e-15);
  EXPECT_THROW(cumulant(s, 1), ValidationError);
  EXPECT_THROW(cumulant(s, 9), ValidationError);
}

TEST(Cumulants, FourthCumulantMonteCarlo) {
  const auto& s = rosenblatt_spectrum();
  const std::size_t n = 1000000;
  const auto xs = spectral_sample(s, n, 99);
  // k-statistic k4
  const double m = sample_mean(xs);
  double s2 = 0, s4 = 0;
  for (double x : xs) {
    const double d = x - m;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  const double N = static_cast<double>(n);
  const double m2 = s2 / N, m4 = s4 / N;
  const double k4 = N * N * ((N + 1) * m4 - 3 * (N - 1) * m2 * m2) / ((N - 1) * (N - 2) * (N - 3));
  double k[9];
  for (int j = 2; j <= 8; ++j) k[j] = cumulant(s, j);
  // leading-order variance of k4
  const double var = (k[8] + 16 * k[2] * k[6] + 48 * k[3] * k[5] + 34 * k[4] * k[4] + 72 * k[2] * k[2] * k[4] +
                      144 * k[2] * k[3] * k[3] + 24 * std::pow(k[2], 4)) / N;
  EXPECT_NEAR(k4, 48.0 * s.sum_power(4), 4.0 * std::sqrt(var));
}

TEST(MomentRatio, SingleEigenvalue) {
  const auto s = spectrum_from_values({1.7});
  EXPECT_NEAR(moment_bound_ratio(s, 4), 15.0, 1e-12);
  EXPECT_NEAR(moment_bound_ratio(s, 6), 755.0, 1e-9);
  EXPECT_THROW(moment_bound_ratio(s, 5), ValidationError);
}

TEST(MomentRatio, RangeAndRegression) {
  for (auto v : {std::vector<double>{1.0, 1.0}, {1.0, -0.5, 0.25}, {2.0, 1.0, 1.0, 1.0, 0.1}}) {
    const double r = moment_bound_ratio(spectrum_from_values(v), 4);
    EXPECT_GE(r, 3.0);
    EXPECT_LE(r, 15.0);
  }
  const auto& s = rosenblatt_spectrum();
  const double r = moment_bound_ratio(s, 4);
  EXPECT_NEAR(r, 3.0 + 48.0 * s.sum_power(4) / std::pow(2.0 * s.sum_power(2), 2), 1e-10);
  EXPECT_LT(r, 15.0);
  std::printf("moment ratio m=4 for (0.6,0.8): %.6f\n", r);
}

TEST(Nondegeneracy, GammaIdentity) {
  EXPECT_NEAR(exponential_witness_integral(1.0, 0.6, 0.0), 2.99157, 1e-5);
  EXPECT_NEAR(exponential_witness_integral(1.0, 0.6, 0.0) / std::tgamma(0.3), 1.0, 1e-6);
}

TEST(Nondegeneracy, RosenblattPasses) {
  const auto r = nondegeneracy_check({0.6, 0.8}, 1.0, test_domain());
  EXPECT_GE(r.k_positive, 3u);
  EXPECT_GT(r.gram_min_singular, 1e-6);
  EXPECT_LE(r.gamma_identity_error, 1e-6);
  EXPECT_TRUE(r.ok()) << r.failure();
}

TEST(Nondegeneracy, RankOneFails) {
  const auto d = TruncatedDomain::uniform(2.0, 1.0, 64);
  Eigen::VectorXd a(64);
  for (int j = 0; j < 64; ++j) a[j] = 1.0 + 0.1 * j;
  // keep the diagonal so the operator is exactly rank one
  auto km = coefficient_matrix(d, a * a.transpose(), "rank-one");
  const auto r = nondegeneracy_check(km);
  EXPECT_EQ(r.k_positive, 1u);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.failure(), "too few eigenvalues above threshold");
  EXPECT_FALSE(r.gram_independent);
}

TEST(Weyl, PerturbationBound) {
  const auto d = TruncatedDomain::graded(50.0, 1.0, 96);
  const auto f = discretize_kernel({0.6, 0.8}, 1.0, d);
  const auto g = discretize_kernel({0.63, 0.8}, 1.0, d);
  auto alg = [](const KernelMatrix& km) {
    const Eigen::VectorXd sw = km.weights.array().sqrt();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sw.asDiagonal() * km.values * sw.asDiagonal());
    return es.eigenvalues();
  };
  const auto a = alg(f), b = alg(g);
  const double dist = std::sqrt(kernel_l2_distance_sq(f, g));
  for (Eigen::Index k = 0; k < a.size(); ++k) EXPECT_LE(std::abs(a[k] - b[k]), dist * (1.0 + 1e-12));
}
