#pragma once

// Eigen-expansion of I_2(f): spectrum of the Nystrom matrix, characteristic function, cumulants,
// spectral sampling and the nondegeneracy check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rosen/error.hpp"
#include "rosen/kernel.hpp"
#include "rosen/random.hpp"

namespace rosen {

struct EigenSpectrum {
  std::vector<double> lambdas;  // decreasing |lambda|
  std::size_t truncation_rank = 0;
  double residual_mass = 0.0;  // sum of squared discarded eigenvalues
  double total_mass = 0.0;     // ||f||^2 of the discretized kernel
  std::string label;

  double sum_power(int m) const {
    double s = 0.0;
    for (double l : lambdas) s += std::pow(l, m);
    return s;
  }
};

inline constexpr double kDefaultRelativeCutoff = 1e-6;
inline constexpr std::size_t kDefaultRankCap = 256;

// Eigenvalues sorted by decreasing absolute value.
inline std::vector<double> sorted_by_magnitude(std::vector<double> v) {
  std::stable_sort(v.begin(), v.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  return v;
}

// Spectrum of S = sqrt(W) A sqrt(W). rank = 0 keeps eigenvalues above 1e-6 |lambda_1|, at most 256.
inline EigenSpectrum eigen_decompose(const KernelMatrix& km, std::size_t rank = 0) {
  const Eigen::VectorXd sw = km.weights.array().sqrt();
  const Eigen::MatrixXd S = sw.asDiagonal() * km.values * sw.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigen_decompose: symmetric eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  auto all = sorted_by_magnitude(std::vector<double>(ev.data(), ev.data() + ev.size()));
  EigenSpectrum spec;
  spec.label = km.label;
  spec.total_mass = S.squaredNorm();
  std::size_t keep = rank;
  if (keep == 0) {
    const double cut = all.empty() ? 0.0 : kDefaultRelativeCutoff * std::abs(all.front());
    while (keep < all.size() && keep < kDefaultRankCap && std::abs(all[keep]) > cut) ++keep;
  }
  keep = std::min(keep, all.size());
  spec.lambdas.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep));
  spec.truncation_rank = keep;
  double kept = 0.0;
  for (double l : spec.lambdas) kept += l * l;
  spec.residual_mass = std::max(0.0, spec.total_mass - kept);
  return spec;
}

// Spectrum from explicit eigenvalues (synthetic kernels).
inline EigenSpectrum spectrum_from_values(std::vector<double> lambdas, std::string label = "synthetic") {
  EigenSpectrum s;
  s.lambdas = sorted_by_magnitude(std::move(lambdas));
  s.truncation_rank = s.lambdas.size();
  s.total_mass = s.sum_power(2);
  s.label = std::move(label);
  return s;
}

struct CharFunctionValue {
  std::complex<double> value;
  double tail_bound = 0.0;  // bound on |true - value| from the discarded eigenvalues
};

// prod_k exp(-i alpha lambda_k) / sqrt(1 - 2 i alpha lambda_k), accumulated as a sum of principal logs.
// Each discarded factor has |log| <= (alpha lambda)^2, giving the bound |phi| expm1(alpha^2 residual).
inline CharFunctionValue char_function(const EigenSpectrum& spec, double alpha) {
  std::complex<double> lg{0.0, 0.0};
  for (double l : spec.lambdas) {
    const double y = alpha * l;
    lg += std::complex<double>(0.0, -y) - 0.5 * std::log(std::complex<double>(1.0, -2.0 * y));
  }
  const std::complex<double> v = std::exp(lg);
  return {v, std::abs(v) * std::expm1(alpha * alpha * spec.residual_mass)};
}

struct ModulusBound {
  double modulus = 1.0;  // (prod (1 + 4 a^2 l^2))^(-1/4)
  double bound = 1.0;    // three-term truncation of the product
};

struct ElementarySymmetric {
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
};

// e1, e2, e3 of the squared eigenvalues via Newton's identities.
inline ElementarySymmetric squared_elementary_symmetric(const EigenSpectrum& spec) {
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  for (double l : spec.lambdas) {
    const double x = l * l;
    p1 += x;
    p2 += x * x;
    p3 += x * x * x;
  }
  ElementarySymmetric e;
  e.e1 = p1;
  e.e2 = std::max(0.0, (e.e1 * p1 - p2) / 2.0);
  e.e3 = std::max(0.0, (e.e2 * p1 - e.e1 * p2 + p3) / 3.0);
  return e;
}

inline ModulusBound char_modulus_bound(const EigenSpectrum& spec, double alpha) {
  double s = 0.0;
  for (double l : spec.lambdas) s += std::log1p(4.0 * alpha * alpha * l * l);
  const auto e = squared_elementary_symmetric(spec);
  const double a2 = alpha * alpha;
  const double poly = 1.0 + 4.0 * a2 * e.e1 + 16.0 * a2 * a2 * e.e2 + 64.0 * a2 * a2 * a2 * e.e3;
  return {std::exp(-0.25 * s), std::pow(poly, -0.25)};
}

// sum_k lambda_k (zeta_k^2 - 1) with independent standard Gaussians; sample i uses its own stream.
inline std::vector<double> spectral_sample(const EigenSpectrum& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("spectral_sample: n must be >= 1");
  std::vector<double> out(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    RandomStream rng(seed, stream_id("spectral", static_cast<std::uint64_t>(i)));
    double s = 0.0;
    for (double l : spec.lambdas) {
      const double z = rng.normal();
      s += l * (z * z - 1.0);
    }
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

// kappa_m = 2^(m-1) (m-1)! sum lambda^m.
inline double cumulant(const EigenSpectrum& spec, int m) {
  if (m < 2 || m > 8) throw ValidationError("cumulant: order must lie in [2, 8]");
  double fact = 1.0;
  for (int k = 2; k < m; ++k) fact *= k;
  return std::exp2(m - 1) * fact * spec.sum_power(m);
}

// Raw moments from cumulants (kappa_1 = 0) by the moment-cumulant recursion.
inline std::vector<double> moments_from_cumulants(const std::vector<double>& kappa, int order) {
  std::vector<double> mu(static_cast<std::size_t>(order) + 1, 0.0);
  mu[0] = 1.0;
  for (int n = 1; n <= order; ++n) {
    double s = 0.0;
    double binom = 1.0;  // C(n-1, k)
    for (int k = 0; k < n; ++k) {
      s += binom * kappa[static_cast<std::size_t>(k) + 1] * mu[static_cast<std::size_t>(n - 1 - k)];
      binom = binom * (n - 1 - k) / (k + 1);
    }
    mu[static_cast<std::size_t>(n)] = s;
  }
  return mu;
}

// E[I_2^m] / (E[I_2^2])^(m/2) for m in {4, 6}.
inline double moment_bound_ratio(const EigenSpectrum& spec, int m) {
  if (m != 4 && m != 6) throw ValidationError("moment_bound_ratio: m must be 4 or 6");
  std::vector<double> kappa(static_cast<std::size_t>(m) + 1, 0.0);
  for (int k = 2; k <= m; ++k) kappa[static_cast<std::size_t>(k)] = cumulant(spec, k);
  const auto mu = moments_from_cumulants(kappa, m);
  if (!(mu[2] > 0.0)) throw NumericalError("moment_bound_ratio: zero variance");
  return mu[static_cast<std::size_t>(m)] / std::pow(mu[2], m / 2.0);
}

// Two-sided Laplace-type identity int_{-inf}^s (s-y)^(h/2-1) e^(a y) dy = a^(-h/2) Gamma(h/2) e^(a s),
// evaluated by quadrature in u = s - y. Returns the quadrature value.
inline double exponential_witness_integral(double a, double h, double s) {
  const double e = 0.5 * h - 1.0;
  auto f = [&](double u) { return std::exp(e * std::log(u) - a * u); };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double head = ts.integrate(f, 0.0, 1.0, 1e-14);
  const double tail = es.integrate(f, 1.0, std::numeric_limits<double>::infinity(), 1e-14);
  return std::exp(a * s) * (head + tail);
}

inline double exponential_witness_closed(double a, double h, double s) {
  return std::pow(a, -0.5 * h) * boost::math::tgamma(0.5 * h) * std::exp(a * s);
}

struct NondegeneracyReport {
  std::size_t k_positive = 0;       // eigenvalues above threshold * lambda_1
  std::vector<double> leading;      // up to five leading eigenvalues
  double gram_min_singular = 0.0;   // smallest singular value of the normalized image Gram matrix
  double gamma_identity_error = 0.0;  // worst relative error of the exponential identity
  bool enough_eigenvalues = false;
  bool gram_independent = false;
  bool gamma_identity_ok = false;
  bool ok() const { return enough_eigenvalues && gram_independent && gamma_identity_ok; }
  std::string failure() const {
    if (!enough_eigenvalues) return "too few eigenvalues above threshold";
    if (!gram_independent) return "exponential-witness Gram matrix degenerate";
    if (!gamma_identity_ok) return "exponential identity quadrature mismatch";
    return "";
  }
};

struct NondegeneracyOptions {
  double threshold = 1e-4;
  double gram_tol = 1e-6;
  double gamma_tol = 1e-6;
  std::vector<double> witness_rates{1.0, 2.0, 4.0};
  std::vector<double> identity_h{0.6, 0.7, 0.9};
  std::vector<double> identity_s{0.0, 0.5, 1.0};
};

// Counts large eigenvalues, checks that the operator maps e^{ax}1{x<=1} for several a to linearly
// independent images, and checks the exponential identity by quadrature.
inline NondegeneracyReport nondegeneracy_check(const KernelMatrix& km, const NondegeneracyOptions& opt = {}) {
  if (!(opt.threshold > 0.0 && opt.threshold < 1.0)) throw ValidationError("threshold must lie in (0, 1)");
  NondegeneracyReport rep;
  const auto spec = eigen_decompose(km, km.size());
  const double l1 = spec.lambdas.empty() ? 0.0 : spec.lambdas.front();
  for (double l : spec.lambdas) {
    if (l1 > 0.0 && l > opt.threshold * l1) ++rep.k_positive;
  }
  for (std::size_t k = 0; k < std::min<std::size_t>(5, spec.lambdas.size()); ++k) rep.leading.push_back(spec.lambdas[k]);
  rep.enough_eigenvalues = rep.k_positive >= 3;

  const auto M = static_cast<Eigen::Index>(km.size());
  const auto na = static_cast<Eigen::Index>(opt.witness_rates.size());
  Eigen::MatrixXd images(M, na);
  for (Eigen::Index q = 0; q < na; ++q) {
    Eigen::VectorXd fa(M);
    for (Eigen::Index j = 0; j < M; ++j) {
      const double x = km.domain.midpoint(static_cast<std::size_t>(j));
      fa[j] = x <= 1.0 ? std::exp(opt.witness_rates[static_cast<std::size_t>(q)] * x) : 0.0;
    }
    images.col(q) = km.values * (km.weights.array() * fa.array()).matrix();
  }
  Eigen::MatrixXd gram = images.transpose() * km.weights.asDiagonal() * images;
  const Eigen::VectorXd nrm = gram.diagonal().array().sqrt();
  if ((nrm.array() > 0.0).all()) {
    gram = nrm.cwiseInverse().asDiagonal() * gram * nrm.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
    rep.gram_min_singular = svd.singularValues()(svd.singularValues().size() - 1);
  }
  rep.gram_independent = rep.gram_min_singular > opt.gram_tol;

  double worst = 0.0;
  for (double a : opt.witness_rates) {
    for (double h : opt.identity_h) {
      for (double s : opt.identity_s) {
        const double q = exponential_witness_integral(a, h, s);
        const double c = exponential_witness_closed(a, h, s);
        worst = std::max(worst, std::abs(q / c - 1.0));
      }
    }
  }
  rep.gamma_identity_error = worst;
  rep.gamma_identity_ok = worst <= opt.gamma_tol;
  return rep;
}

inline NondegeneracyReport nondegeneracy_check(const HurstPair& pair, double t, const TruncatedDomain& dom,
                                               const NondegeneracyOptions& opt = {}) {
  return nondegeneracy_check(discretize_kernel(pair, t, dom), opt);
}

inline void write_spectrum_csv(std::ostream& os, const EigenSpectrum& spec, const std::string& metadata) {
  os << "# " << metadata << "\n";
  os << "# rank=" << spec.truncation_rank << " residual_mass=" << format_double(spec.residual_mass)
     << " total_mass=" << format_double(spec.total_mass) << "\n";
  os << "index,lambda\n";
  for (std::size_t k = 0; k < spec.lambdas.size(); ++k) os << k + 1 << ',' << format_double(spec.lambdas[k]) << "\n";
}

inline void write_cf_trace_csv(std::ostream& os, const EigenSpectrum& spec, const std::vector<double>& alphas,
                               const std::string& metadata) {
  os << "# " << metadata << "\n";
  os << "alpha,re,im,modulus,bound\n";
  for (double a : alphas) {
    const auto cf = char_function(spec, a);
    const auto mb = char_modulus_bound(spec, a);
    os << format_double(a) << ',' << format_double(cf.value.real()) << ',' << format_double(cf.value.imag()) << ','
       << format_double(mb.modulus) << ',' << format_double(mb.bound) << "\n";
  }
}

}  // namespace rosen
