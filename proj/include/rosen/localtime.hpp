#pragma once

// Occupation-density histograms of sampled paths and the Berman integral over increment spectra.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rosen/error.hpp"
#include "rosen/hurst.hpp"
#include "rosen/kernel.hpp"
#include "rosen/spectral.hpp"
#include "rosen/stats.hpp"

namespace rosen {

struct LocalTimeHistogram {
  double a = 0.0, b = 0.0;
  double bin_width = 0.0;
  std::vector<double> bin_edges;
  std::vector<double> density;  // occupation / bin_width

  double center(std::size_t k) const { return 0.5 * (bin_edges[k] + bin_edges[k + 1]); }
};

namespace detail {

inline std::size_t grid_index(std::span<const double> times, double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t - 1e-12 * std::max(1.0, std::abs(t)));
  if (it == times.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, std::abs(t))) {
    throw ValidationError("interval endpoint " + format_double(t) + " is not a grid time");
  }
  return static_cast<std::size_t>(it - times.begin());
}

}  // namespace detail

// Each step [t_i, t_{i+1}] inside A adds t_{i+1} - t_i to the bin holding X(t_i).
inline LocalTimeHistogram estimate_local_time(std::span<const double> path, std::span<const double> times, double a,
                                              double b, double bin_width) {
  if (path.size() != times.size()) throw ValidationError("path and time grid lengths differ");
  if (!(bin_width > 0.0)) throw ValidationError("bin width must be positive");
  if (!(b > a)) throw ValidationError("empty interval A");
  const std::size_t ia = detail::grid_index(times, a), ib = detail::grid_index(times, b);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = ia; i < ib; ++i) {
    lo = std::min(lo, path[i]);
    hi = std::max(hi, path[i]);
  }
  LocalTimeHistogram h;
  h.a = a;
  h.b = b;
  h.bin_width = bin_width;
  const double origin = std::floor(lo / bin_width) * bin_width;
  const auto bins = static_cast<std::size_t>(std::floor((hi - origin) / bin_width)) + 1;
  h.bin_edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) h.bin_edges[k] = origin + bin_width * static_cast<double>(k);
  std::vector<double> occ(bins, 0.0);
  for (std::size_t i = ia; i < ib; ++i) {
    auto k = static_cast<std::size_t>(std::floor((path[i] - origin) / bin_width));
    k = std::min(k, bins - 1);
    occ[k] += times[i + 1] - times[i];
  }
  h.density.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) h.density[k] = occ[k] / bin_width;
  return h;
}

inline double occupation_mass(const LocalTimeHistogram& h) {
  double s = 0.0;
  for (double d : h.density) s += d * h.bin_width;
  return s;
}

// Proxy for int L(A,x)^2 dx.
inline double l2_mass(const LocalTimeHistogram& h) {
  double s = 0.0;
  for (double d : h.density) s += d * d * h.bin_width;
  return s;
}

struct OccupationCheck {
  double path_integral = 0.0;       // left-endpoint sum of g(X_s) ds over A
  double histogram_integral = 0.0;  // sum g(center) density width
  double bound = 0.0;               // Lipschitz(g) * bin_width * |A|
  bool pass = false;
};

inline OccupationCheck occupation_identity(std::span<const double> path, std::span<const double> times,
                                           const LocalTimeHistogram& h, const std::function<double(double)>& g,
                                           double lipschitz) {
  const std::size_t ia = detail::grid_index(times, h.a), ib = detail::grid_index(times, h.b);
  OccupationCheck c;
  for (std::size_t i = ia; i < ib; ++i) c.path_integral += g(path[i]) * (times[i + 1] - times[i]);
  for (std::size_t k = 0; k < h.density.size(); ++k) c.histogram_integral += g(h.center(k)) * h.density[k] * h.bin_width;
  c.bound = lipschitz * h.bin_width * (h.b - h.a);
  c.pass = std::abs(c.path_integral - c.histogram_integral) <= c.bound + 1e-12 * (h.b - h.a);
  return c;
}

inline void write_histogram_csv(std::ostream& os, const LocalTimeHistogram& h, const std::string& metadata) {
  os << "# " << metadata << "\n";
  os << "# A=[" << format_double(h.a) << "," << format_double(h.b) << "] bin_width=" << format_double(h.bin_width) << "\n";
  os << "bin_left,bin_right,density\n";
  for (std::size_t k = 0; k < h.density.size(); ++k) {
    os << format_double(h.bin_edges[k]) << ',' << format_double(h.bin_edges[k + 1]) << ',' << format_double(h.density[k])
       << "\n";
  }
}

// Spectrum of the kernel of Z_t - Z_s.
struct GapSpectrum {
  double s = 0.0, t = 0.0;
  EigenSpectrum spectrum;
};

struct BermanOptions {
  double vmax_factor = 1e3;  // v_max = vmax_factor / sigma
  double fit_lo = 1e2;       // v-tail fit window [fit_lo, fit_hi] / sigma
  double fit_hi = 1e4;
  double eigen_threshold = 1e-4;  // relative to |lambda_1|
  double horizon = 1.0;           // A = [0, horizon]
  bool strict = true;             // throw when a gap has fewer than 3 significant eigenvalues
};

struct BermanRow {
  double s = 0.0, t = 0.0, gap = 0.0;
  double sigma = 0.0;
  double numeric = 0.0;  // int_{|v|<=vmax} |phi(v)| dv
  double tail = 0.0;     // analytic bound on int_{|v|>vmax}
  double inner = 0.0;    // numeric + tail
  double v_exponent = 0.0;
  std::size_t k_significant = 0;
};

struct BermanReport {
  std::vector<BermanRow> rows;
  double v_tail_exponent = 0.0;  // largest (least negative) per-gap exponent
  double gap_exponent = 0.0;     // slope of log inner integral against log gap
  double total = 0.0;
  bool integrable = false;
  std::string reason;
};

// Fitted log-log slope of the three-term bound on [lo, hi].
inline double modulus_bound_exponent(const EigenSpectrum& spec, double lo, double hi, int points = 9) {
  std::vector<double> x, y;
  for (int i = 0; i < points; ++i) {
    const double v = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    x.push_back(std::log(v));
    y.push_back(std::log(char_modulus_bound(spec, v).bound));
  }
  return weighted_linear_fit(x, y).slope;
}

// int_{-vmax}^{vmax} |E exp(iv I_2)| dv plus 4 (64 e3)^(-1/4) vmax^(-1/2), the integral of the
// three-term bound's v^(-3/2) majorant beyond vmax.
inline BermanRow berman_inner(const EigenSpectrum& spec, double vmax_factor, double fit_lo, double fit_hi) {
  BermanRow r;
  const double var = 2.0 * spec.sum_power(2);
  if (!(var > 0.0)) throw NumericalError("berman: zero-variance increment");
  r.sigma = std::sqrt(var);
  const double vmax = vmax_factor / r.sigma;
  auto f = [&](double v) { return char_modulus_bound(spec, v).modulus; };
  double acc = 0.0;
  double lo = 0.0;
  for (double hi = 1.0 / r.sigma; lo < vmax; hi *= 10.0) {
    const double top = std::min(hi, vmax);
    double err = 0.0;
    acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, top, 15, 1e-10, &err);
    lo = top;
  }
  r.numeric = 2.0 * acc;
  const auto e = squared_elementary_symmetric(spec);
  r.tail = e.e3 > 0.0 ? 4.0 * std::pow(64.0 * e.e3, -0.25) / std::sqrt(vmax) : std::numeric_limits<double>::infinity();
  r.inner = r.numeric + r.tail;
  r.v_exponent = modulus_bound_exponent(spec, fit_lo / r.sigma, fit_hi / r.sigma);
  return r;
}

// Berman triple integral over A x A x R from spectra at several (s,t). The inner v integral is
// averaged per gap |t-s|, fitted as c |t-s|^slope, and integrated as 2 int_0^T (T-g) J(g) dg with
// the power law used below the smallest and above the largest sampled gap.
inline BermanReport berman_integral(const std::vector<GapSpectrum>& gaps, const BermanOptions& opt = {}) {
  if (gaps.size() < 2) throw ValidationError("berman_integral: need spectra at two or more gaps");
  BermanReport rep;
  rep.v_tail_exponent = -std::numeric_limits<double>::infinity();
  for (const auto& g : gaps) {
    if (!(g.t > g.s)) throw ValidationError("berman_integral: need s < t (diagonal excluded)");
    const auto& sp = g.spectrum;
    std::size_t k = 0;
    const double l1 = sp.lambdas.empty() ? 0.0 : std::abs(sp.lambdas.front());
    for (double l : sp.lambdas) k += std::abs(l) > opt.eigen_threshold * l1 ? 1 : 0;
    if (k < 3 && opt.strict) {
      throw NumericalError("berman_integral: only " + std::to_string(k) + " significant eigenvalues at s=" +
                           format_double(g.s) + ", t=" + format_double(g.t) + "; the v tail is not integrable by this bound");
    }
    auto row = berman_inner(sp, opt.vmax_factor, opt.fit_lo, opt.fit_hi);
    row.s = g.s;
    row.t = g.t;
    row.gap = g.t - g.s;
    row.k_significant = k;
    rep.v_tail_exponent = std::max(rep.v_tail_exponent, row.v_exponent);
    rep.rows.push_back(row);
  }
  // average the inner integral per distinct gap
  std::vector<std::pair<double, double>> per_gap;  // (gap, mean J)
  {
    auto rows = rep.rows;
    std::sort(rows.begin(), rows.end(), [](const BermanRow& x, const BermanRow& y) { return x.gap < y.gap; });
    for (std::size_t i = 0; i < rows.size();) {
      std::size_t j = i;
      double sum = 0.0;
      while (j < rows.size() && std::abs(rows[j].gap - rows[i].gap) <= 1e-12 * rows[i].gap) sum += rows[j++].inner;
      per_gap.emplace_back(rows[i].gap, sum / static_cast<double>(j - i));
      i = j;
    }
  }
  if (per_gap.size() < 2) throw ValidationError("berman_integral: need at least two distinct gaps");
  std::vector<double> lx, ly;
  for (const auto& [g, J] : per_gap) {
    lx.push_back(std::log(g));
    ly.push_back(std::log(J));
  }
  const auto fit = weighted_linear_fit(lx, ly);
  rep.gap_exponent = fit.slope;
  const double beta = -fit.slope, c = std::exp(fit.intercept), T = opt.horizon;

  if (rep.v_tail_exponent >= -1.0) {
    rep.integrable = false;
    rep.reason = "v tail decays like |v|^" + format_double(rep.v_tail_exponent) + ", not integrable";
    rep.total = std::numeric_limits<double>::infinity();
    return rep;
  }
  if (beta >= 1.0) {
    rep.integrable = false;
    rep.reason = "inner integral grows like |t-s|^" + format_double(fit.slope) + " near the diagonal";
    rep.total = std::numeric_limits<double>::infinity();
    return rep;
  }
  // int_a^b (T - g) c g^-beta dg
  auto power_part = [&](double a, double b) {
    auto F = [&](double g) { return c * (T * std::pow(g, 1.0 - beta) / (1.0 - beta) - std::pow(g, 2.0 - beta) / (2.0 - beta)); };
    return F(b) - (a > 0.0 ? F(a) : 0.0);
  };
  double total = power_part(0.0, per_gap.front().first);
  for (std::size_t i = 0; i + 1 < per_gap.size(); ++i) {
    const auto [g0, J0] = per_gap[i];
    const auto [g1, J1] = per_gap[i + 1];
    total += 0.5 * (g1 - g0) * ((T - g0) * J0 + (T - g1) * J1);
  }
  if (per_gap.back().first < T) total += power_part(per_gap.back().first, T);
  rep.total = 2.0 * total;
  rep.integrable = std::isfinite(rep.total);
  if (!rep.integrable) rep.reason = "non-finite total";
  return rep;
}

// Increment spectra of Y^{H1,H2}: kernel int_{t-g}^{t} K ds on one domain.
inline std::vector<GapSpectrum> rosenblatt_gap_spectra(const HurstPair& pair, double t, const std::vector<double>& gaps,
                                                       const TruncatedDomain& dom) {
  std::vector<GapSpectrum> out;
  for (double g : gaps) {
    if (!(g > 0.0 && g <= t)) throw ValidationError("gap must lie in (0, t]");
    out.push_back({t - g, t, eigen_decompose(discretize_increment(pair, t - g, t, dom))});
  }
  return out;
}

// Multifractional increment kernel g = f_{H(t)}(t) - f_{H(s)}(s) split as g1 + g2 with
// g1 = f_{H(t)}(t) - f_{H(t)}(s) and g2 = f_{H(t)}(s) - f_{H(s)}(s).
struct MultifractionalGap {
  double s = 0.0, t = 0.0;
  EigenSpectrum g, g1;
  double g2_norm = 0.0;  // Hilbert-Schmidt norm, bounds the operator norm
};

inline MultifractionalGap multifractional_gap(const HurstProfile& profile, double s, double t, const TruncatedDomain& dom) {
  const auto pt = profile.at(t), ps = profile.at(s);
  const auto ft_t = discretize_kernel(pt, t, dom);
  const auto ft_s = discretize_kernel(pt, s, dom);
  const auto fs_s = discretize_kernel(ps, s, dom);
  MultifractionalGap m;
  m.s = s;
  m.t = t;
  m.g = eigen_decompose(kernel_difference(ft_t, fs_s, "g"));
  m.g1 = eigen_decompose(kernel_difference(ft_t, ft_s, "g1"));
  m.g2_norm = std::sqrt(kernel_l2_distance_sq(ft_s, fs_s));
  return m;
}

inline void write_berman_json(std::ostream& os, const BermanReport& r) {
  os << "{\"total\": " << format_double(r.total) << ", \"integrable\": " << (r.integrable ? "true" : "false")
     << ", \"v_tail_exponent\": " << format_double(r.v_tail_exponent)
     << ", \"gap_exponent\": " << format_double(r.gap_exponent) << ", \"reason\": \"" << r.reason << "\", \"gaps\": [";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& w = r.rows[i];
    os << (i ? ", " : "") << "{\"s\": " << format_double(w.s) << ", \"t\": " << format_double(w.t)
       << ", \"sigma\": " << format_double(w.sigma) << ", \"numeric\": " << format_double(w.numeric)
       << ", \"tail\": " << format_double(w.tail) << ", \"v_exponent\": " << format_double(w.v_exponent)
       << ", \"k\": " << w.k_significant << "}";
  }
  os << "]}\n";
}

}  // namespace rosen
