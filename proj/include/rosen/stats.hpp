#pragma once

// Estimators and hypothesis checks: weighted fits, two-sample KS, empirical characteristic functions,
// scaling exponents, self-similarity, stationarity and path regularity.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rosen/error.hpp"
#include "rosen/kernel.hpp"
#include "rosen/paths.hpp"

namespace rosen {

enum class FitCriterion { within, at_least };

struct FitReport {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double r2 = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  FitCriterion criterion = FitCriterion::within;
  bool pass = false;
};

inline bool fit_passes(double slope, double target, double tolerance, FitCriterion c) {
  if (c == FitCriterion::at_least) return slope >= target - tolerance;
  return std::abs(slope - target) <= tolerance;
}

// Least squares of y on x. With sigma, weights are 1/sigma^2 and standard errors are the
// weighted-model ones; without it, residual-based.
inline FitReport weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                                     std::span<const double> sigma = {}) {
  const std::size_t n = x.size();
  if (n != y.size() || (!sigma.empty() && sigma.size() != n)) throw ValidationError("fit: length mismatch");
  if (n < 2) throw ValidationError("fit: need at least two points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    sxx += w * (x[i] - mx) * (x[i] - mx);
    sxy += w * (x[i] - mx) * (y[i] - my);
    syy += w * (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericalError("fit: degenerate abscissae");
  FitReport r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    const double e = y[i] - r.intercept - r.slope * x[i];
    rss += w * e * e;
  }
  r.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  const double s2 = sigma.empty() ? (n > 2 ? rss / static_cast<double>(n - 2) : 0.0) : 1.0;
  r.slope_se = std::sqrt(s2 / sxx);
  r.intercept_se = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
  return r;
}

inline FitReport judge(FitReport r, double target, double tolerance, FitCriterion c = FitCriterion::within) {
  r.target = target;
  r.tolerance = tolerance;
  r.criterion = c;
  r.pass = fit_passes(r.slope, target, tolerance, c);
  return r;
}

// sup |F_a - F_b| of the two empirical distribution functions.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ValidationError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Asymptotic two-sample critical value c(alpha) sqrt((n+m)/(nm)), c(alpha) = sqrt(-ln(alpha/2)/2).
inline double ks_critical_value(double alpha, std::size_t n, std::size_t m) {
  const double c = std::sqrt(-0.5 * std::log(0.5 * alpha));
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

inline std::complex<double> empirical_cf(std::span<const double> xs, double alpha, double scale = 1.0) {
  double re = 0.0, im = 0.0;
  for (double x : xs) {
    re += std::cos(alpha * scale * x);
    im += std::sin(alpha * scale * x);
  }
  const double n = static_cast<double>(xs.size());
  return {re / n, im / n};
}

inline std::vector<double> alpha_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return g;
}

// sup over the grid of |ECF(a * scale_a) - ECF(b * scale_b)|.
inline double ecf_sup_distance(std::span<const double> a, double scale_a, std::span<const double> b, double scale_b,
                               const std::vector<double>& alphas) {
  double d = 0.0;
  for (double al : alphas) d = std::max(d, std::abs(empirical_cf(a, al, scale_a) - empirical_cf(b, al, scale_b)));
  return d;
}

struct LagMoment {
  double lag = 0.0;
  double m2 = 0.0;
  double se = 0.0;
};

// Second moments of X_anchor - X_{anchor - lag} for each listed earlier grid index.
inline std::vector<LagMoment> lag_moments(const PathEnsemble& ens, std::size_t anchor,
                                          const std::vector<std::size_t>& earlier) {
  std::vector<LagMoment> out;
  for (std::size_t s : earlier) {
    const auto m = increment_moments(ens, s, anchor, {2}).front();
    out.push_back({ens.times[anchor] - ens.times[s], m.value, m.se});
  }
  return out;
}

// Weighted log-log fit of second moments against lag; log-moment errors are se/m2.
inline FitReport scaling_exponent_fit(const std::vector<LagMoment>& moments, double target, double tolerance) {
  if (moments.size() < 3) throw ValidationError("scaling_exponent_fit: need at least 3 lags");
  std::vector<double> x, y, s;
  for (const auto& m : moments) {
    if (!(m.m2 > 0.0)) throw NumericalError("scaling_exponent_fit: zero increment variance");
    x.push_back(std::log(m.lag));
    y.push_back(std::log(m.m2));
    s.push_back(m.se > 0.0 ? m.se / m.m2 : 1e-12);
  }
  return judge(weighted_linear_fit(x, y, s), target, tolerance);
}

inline FitReport scaling_exponent_fit(const PathEnsemble& ens, std::size_t anchor,
                                      const std::vector<std::size_t>& earlier, double target, double tolerance) {
  return scaling_exponent_fit(lag_moments(ens, anchor, earlier), target, tolerance);
}

struct ContinuityReport {
  FitReport fit;               // slope of log E(Y - Y')^2 against log delta; pass means slope >= 1
  std::vector<double> deltas;
  std::vector<double> distances;  // 2 ||f_H - f_H'||^2
  bool monotone = false;
  bool quadratic_supported = false;  // slope closer to 2 than to 1
};

// Deterministic: E(Y_t^{H} - Y_t^{H'})^2 = 2 ||f_H(t) - f_H'(t)||^2 with H' = H + delta on one coordinate.
inline ContinuityReport hurst_continuity_slope(const HurstPair& base, const std::vector<double>& deltas, double t,
                                               const TruncatedDomain& dom, int coordinate = 0,
                                               const DiscretizeOptions& opt = {}) {
  if (deltas.size() < 2) throw ValidationError("hurst_continuity_slope: need at least two deltas");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw ValidationError("hurst_continuity_slope: deltas must be positive");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw ValidationError("hurst_continuity_slope: deltas must decrease");
  }
  ContinuityReport rep;
  const auto f0 = discretize_kernel(base, t, dom, opt);
  std::vector<double> lx, ly;
  for (double d : deltas) {
    const HurstPair p = coordinate == 0 ? HurstPair{base.h1() + d, base.h2()} : HurstPair{base.h1(), base.h2() + d};
    const double dist = 2.0 * kernel_l2_distance_sq(f0, discretize_kernel(p, t, dom, opt));
    rep.deltas.push_back(d);
    rep.distances.push_back(dist);
    lx.push_back(std::log(d));
    ly.push_back(std::log(dist));
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.distances.size(); ++i) rep.monotone = rep.monotone && rep.distances[i] < rep.distances[i - 1];
  rep.fit = judge(weighted_linear_fit(lx, ly), 2.0, 1.0, FitCriterion::at_least);
  rep.quadratic_supported = std::abs(rep.fit.slope - 2.0) < std::abs(rep.fit.slope - 1.0);
  return rep;
}

struct DistanceTest {
  double distance = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Law of Y_{ct} against c^{exponent} Y_t through empirical characteristic functions on a grid of
// standardized arguments: both samples are divided by the exact standard deviation of Y_{ct}.
inline DistanceTest selfsimilarity_distance(std::span<const double> y_t, std::span<const double> y_ct, double c,
                                            double exponent, double sd_ct, const std::vector<double>& alphas) {
  if (!(c > 0.0)) throw ValidationError("selfsimilarity: c must be positive");
  DistanceTest r;
  r.distance = ecf_sup_distance(y_ct, 1.0 / sd_ct, y_t, std::pow(c, exponent) / sd_ct, alphas);
  r.threshold = 4.0 / std::sqrt(static_cast<double>(std::min(y_t.size(), y_ct.size())));
  r.pass = r.distance < r.threshold;
  return r;
}

struct SelfSimilarityOptions {
  std::vector<double> alphas = alpha_grid(-5.0, 5.0, 41);
  double exponent_override = -1.0;  // negative: use (H1+H2)/2
};

// Simulates Y_t and Y_{ct} jointly on one ensemble and compares their laws.
inline DistanceTest selfsimilarity_test(const HurstPair& pair, double c, double t, std::size_t n, std::uint64_t seed,
                                        const TruncatedDomain& dom, const SelfSimilarityOptions& opt = {}) {
  if (!(c > 0.0)) throw ValidationError("selfsimilarity_test: c must be positive");
  if (c * t > dom.horizon() || t > dom.horizon()) throw ValidationError("selfsimilarity_test: need ct <= T");
  std::vector<double> times{std::min(t, c * t), std::max(t, c * t)};
  if (c == 1.0) times = {t};
  const auto kernels = path_kernels(pair, times, dom);
  const auto ens = simulate_from_kernels(kernels, times, n, seed, describe(pair));
  const std::size_t it = c < 1.0 ? 1 : 0;
  const std::size_t ict = c == 1.0 ? 0 : (c < 1.0 ? 0 : 1);
  const double sd = std::sqrt(2.0 * kernel_l2_norm_sq(kernels[ict]));
  const double ex = opt.exponent_override >= 0.0 ? opt.exponent_override : pair.self_similarity_index();
  if (c == 1.0) {
    // same law by construction: compare against an independent ensemble
    const auto other = simulate_from_kernels(kernels, times, n, seed ^ 0x5bd1e995ULL, describe(pair));
    return selfsimilarity_distance(ens.column(0), other.column(0), 1.0, ex, sd, opt.alphas);
  }
  return selfsimilarity_distance(ens.column(it), ens.column(ict), c, ex, sd, opt.alphas);
}

struct KsTest {
  double distance = 0.0;
  double critical = 0.0;
  bool pass = false;
};

inline KsTest ks_test(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.01) {
  KsTest r;
  r.distance = ks_two_sample(a, b);
  r.critical = ks_critical_value(alpha, a.size(), b.size());
  r.pass = r.distance < r.critical;
  return r;
}

// KS between {X_{t1+h} - X_{t1}} and {X_{t2+h} - X_{t2}} from an ensemble containing all four times.
inline KsTest stationary_increments_test(const PathEnsemble& ens, double h, double t1, double t2,
                                         double alpha = 0.01) {
  auto idx = [&](double t) {
    for (std::size_t i = 0; i < ens.times.size(); ++i) {
      if (std::abs(ens.times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
    }
    throw ValidationError("stationary_increments_test: time " + format_double(t) + " not on the grid");
  };
  return ks_test(ens.increment(idx(t1), idx(t1 + h)), ens.increment(idx(t2), idx(t2 + h)), alpha);
}

inline std::vector<double> union_times(std::vector<double> t) {
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

// Simulates the four times for a constant pair and runs the KS comparison.
inline KsTest stationary_increments_test(const HurstPair& pair, double h, double t1, double t2, std::size_t n,
                                         std::uint64_t seed, const TruncatedDomain& dom) {
  if (t1 + h > dom.horizon() || t2 + h > dom.horizon()) throw ValidationError("need t + h <= T");
  const auto times = union_times({t1, t1 + h, t2, t2 + h});
  return stationary_increments_test(simulate_rosenblatt(pair, times, dom, n, seed), h, t1, t2);
}

inline KsTest stationary_increments_test(const HurstProfile& profile, double h, double t1, double t2, std::size_t n,
                                         std::uint64_t seed, const TruncatedDomain& dom) {
  if (t1 + h > dom.horizon() || t2 + h > dom.horizon()) throw ValidationError("need t + h <= T");
  const auto times = union_times({t1, t1 + h, t2, t2 + h});
  return stationary_increments_test(simulate_multifractional(profile, times, dom, n, seed), h, t1, t2);
}

// Regression of the mean log block-maximum of |X_{t+h} - X_t| on log h over dyadic spacings
// h = 2^j dt. Each block holds the same number of consecutive non-overlapping increments, so under
// self-similarity the block maximum scales exactly like h^H at every scale.
inline FitReport holder_exponent_estimate(std::span<const double> path, double dt, std::size_t block = 8,
                                          std::size_t finest_step = 1) {
  const std::size_t n = path.size();
  if (n < 2) throw ValidationError("holder_exponent_estimate: path too short");
  if (block == 0 || finest_step == 0) throw ValidationError("holder_exponent_estimate: block and step must be positive");
  std::vector<double> lx, ly;
  for (std::size_t step = finest_step; step < n; step *= 2) {
    const std::size_t pairs = (n - 1) / step;
    const std::size_t blocks = pairs / block;
    if (blocks == 0) break;
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      double mx = 0.0;
      for (std::size_t k = 0; k < block; ++k) {
        const std::size_t i = (b * block + k) * step;
        mx = std::max(mx, std::abs(path[i + step] - path[i]));
      }
      if (mx > 0.0) {
        acc += std::log(mx);
        ++used;
      }
    }
    if (used == 0) continue;
    lx.push_back(std::log(dt * static_cast<double>(step)));
    ly.push_back(acc / static_cast<double>(used));
  }
  if (lx.size() < 3) throw ValidationError("holder_exponent_estimate: fewer than 3 usable scales");
  return weighted_linear_fit(lx, ly);
}

}  // namespace rosen
