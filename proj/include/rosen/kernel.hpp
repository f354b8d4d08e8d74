#pragma once

// The generalized Rosenblatt kernel, its time integral and cell-averaged discretizations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rosen/domain.hpp"
#include "rosen/error.hpp"
#include "rosen/hurst.hpp"
#include "rosen/util.hpp"

namespace rosen {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// K(s,x,y) = (s-x)_+^{a1}(s-y)_+^{a2} + (s-x)_+^{a2}(s-y)_+^{a1} with a_i = H_i/2 - 1.
inline double kernel_K(const HurstPair& pair, double s, double x, double y) {
  const double u = s - x, w = s - y;
  if (u < 0.0 || w < 0.0) return 0.0;
  if (u == 0.0 && w == 0.0) return kInf;
  if (u == 0.0 || w == 0.0) return kInf;
  const double a1 = pair.exponent1(), a2 = pair.exponent2();
  return std::pow(u, a1) * std::pow(w, a2) + std::pow(u, a2) * std::pow(w, a1);
}

namespace detail {

struct QuadratureResult {
  double value = 0.0, error = 0.0, magnitude = 0.0;
  QuadratureResult& operator+=(const QuadratureResult& o) {
    value += o.value;
    error += o.error;
    magnitude += o.magnitude;
    return *this;
  }
};

inline QuadratureResult gk_integrate(const auto& f, double a, double b, double tol) {
  QuadratureResult r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 24, tol, &r.error, &r.magnitude);
  return r;
}

// Double-exponential rule; the transformed integrand keeps fractional powers of v at v = 0.
inline QuadratureResult ts_integrate(const auto& f, double a, double b, double tol) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
  QuadratureResult r;
  std::size_t levels = 0;
  // the (x, complement) form avoids rounding abscissae onto a far-from-zero endpoint
  auto fx = [&](double x, double) { return f(x); };
  r.value = integrator.integrate(fx, a, b, tol, &r.error, &r.magnitude, &levels);
  // tanh_sinh stops early when its error estimate stagnates; away from v = 0 the integrand is smooth
  if (r.error > tol * r.magnitude && a > 0.0) {
    const auto g = gk_integrate(f, a, b, tol);
    if (g.error < r.error) r = g;
  }
  return r;
}

inline double checked(const QuadratureResult& r, double tol, double x, double y) {
  if (!std::isfinite(r.value) || r.error > 10.0 * tol * r.magnitude + 1e-300) {
    throw NumericalError("kernel quadrature did not converge at x=" + format_double(x) + ", y=" + format_double(y) +
                         " (error " + format_double(r.error) + ", magnitude " + format_double(r.magnitude) + ")");
  }
  return r.value;
}

}  // namespace detail

// int_{t0}^{t1} K(s,x,y) ds. Returns +inf exactly when x = y lies in [t0, t1).
inline double kernel_time_integral(const HurstPair& pair, double t0, double t1, double x, double y,
                                   double tol = 1e-6) {
  if (!(tol > 0.0)) throw ValidationError("quadrature tolerance must be positive");
  if (!(t1 >= t0)) throw ValidationError("time interval must satisfy t0 <= t1");
  const double m = std::max(x, y);
  const double d = std::abs(x - y);
  const double s0 = std::max(t0, m);
  if (s0 >= t1) return 0.0;
  if (d == 0.0 && m >= t0) return kInf;
  const double a1 = pair.exponent1(), a2 = pair.exponent2();
  const double u0 = s0 - m, u1 = t1 - m;

  if (u0 > u1 - u0) {
    // singular point well outside the interval: integrate directly in s
    auto g = [&](double s) {
      const double lu = std::log(s - m), lw = std::log(s - m + d);
      return std::exp(a1 * lu + a2 * lw) + std::exp(a2 * lu + a1 * lw);
    };
    return detail::checked(detail::gk_integrate(g, s0, t1, tol), tol, x, y);
  }

  // u = v^p removes the u^{a_min} endpoint singularity
  const double amin = std::min(a1, a2);
  const double p = 1.0 / (1.0 + amin);
  const double e1 = p * (a1 + 1.0) - 1.0, e2 = p * (a2 + 1.0) - 1.0;
  auto h = [&](double v) {
    if (v <= 0.0) {
      // limit of the integrand at v = 0 (exponents are >= 0)
      if (d == 0.0) return 0.0;
      const double c1 = e1 == 0.0 ? std::pow(d, a2) : 0.0;
      const double c2 = e2 == 0.0 ? std::pow(d, a1) : 0.0;
      return p * (c1 + c2);
    }
    const double lv = std::log(v);
    const double u = std::exp(p * lv);
    const double lw = std::log(u + d);
    return p * (std::exp(e1 * lv + a2 * lw) + std::exp(e2 * lv + a1 * lw));
  };
  const double v0 = u0 > 0.0 ? std::pow(u0, 1.0 / p) : 0.0;
  const double v1 = std::pow(u1, 1.0 / p);
  const double vd = d > 0.0 ? std::pow(d, 1.0 / p) : 0.0;
  // split where u crosses the scale d of the second factor
  const double margin = 1e-3 * (v1 - v0);
  if (vd > v0 + margin && vd < v1 - margin) {
    auto r = detail::ts_integrate(h, v0, vd, tol);
    r += detail::ts_integrate(h, vd, v1, tol);
    return detail::checked(r, tol, x, y);
  }
  return detail::checked(detail::ts_integrate(h, v0, v1, tol), tol, x, y);
}

// f(t,x,y) = int_0^t K(s,x,y) ds.
inline double time_integrated_kernel(const HurstPair& pair, double t, double x, double y, double tol = 1e-6) {
  if (!(t >= 0.0)) throw ValidationError("time must be nonnegative");
  return kernel_time_integral(pair, 0.0, t, x, y, tol);
}

// Cell-averaged kernel on a truncated domain. The diagonal is zero (a_kk = 0).
struct KernelMatrix {
  TruncatedDomain domain;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::string label;
  Eigen::MatrixXd values;
  Eigen::VectorXd weights;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.rows()); }
};

struct DiscretizeOptions {
  double tol = 1e-6;
};

namespace detail {

inline bool straddles(const TruncatedDomain& dom, std::size_t j, double t) {
  return dom.left(j) < t && t < dom.right(j);
}

}  // namespace detail

// Averages of int_{t0}^{t1} K ds over cell pairs: midpoint for well-separated cells, R x R sub-sampling
// when the cells are within one cell width of each other or a cell straddles t0 or t1.
inline KernelMatrix discretize_increment(const HurstPair& pair, double t0, double t1, const TruncatedDomain& dom,
                                         const DiscretizeOptions& opt = {}) {
  if (!(t0 >= 0.0 && t1 >= t0)) throw ValidationError("need 0 <= t0 <= t1");
  if (t1 > dom.horizon() * (1.0 + 1e-12)) throw ValidationError("time exceeds the domain horizon");
  const std::size_t M = dom.size();
  const int R = dom.refinement();
  KernelMatrix km{dom, t0, t1, "H=(" + format_double(pair.h1()) + "," + format_double(pair.h2()) + ")",
                  Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M)),
                  Eigen::VectorXd(static_cast<Eigen::Index>(M))};
  for (std::size_t j = 0; j < M; ++j) km.weights[static_cast<Eigen::Index>(j)] = dom.width(j);
  if (t1 == t0) return km;

  // first cell whose left edge is at or beyond t1 carries no mass
  std::size_t active = 0;
  while (active < M && dom.left(active) < t1) ++active;

  bool failed = false;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(active); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    for (std::size_t k = j + 1; k < active; ++k) {
      const double gap = dom.left(k) - dom.right(j);
      const bool near = gap <= std::max(dom.width(j), dom.width(k));
      const bool cut = detail::straddles(dom, j, t0) || detail::straddles(dom, j, t1) ||
                       detail::straddles(dom, k, t0) || detail::straddles(dom, k, t1);
      double v;
      if (!near && !cut) {
        v = kernel_time_integral(pair, t0, t1, dom.midpoint(j), dom.midpoint(k), opt.tol);
      } else {
        double acc = 0.0;
        for (int a = 0; a < R; ++a) {
          const double x = dom.left(j) + dom.width(j) * (a + 0.5) / R;
          for (int b = 0; b < R; ++b) {
            const double y = dom.left(k) + dom.width(k) * (b + 0.5) / R;
            acc += kernel_time_integral(pair, t0, t1, x, y, opt.tol);
          }
        }
        v = acc / (static_cast<double>(R) * R);
      }
      if (!std::isfinite(v) || v < 0.0) failed = true;
      km.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v;
      km.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = v;
    }
  }
  if (failed) throw NumericalError("kernel discretization produced a non-finite or negative cell average");
  return km;
}

// f(t,.,.) on the domain.
inline KernelMatrix discretize_kernel(const HurstPair& pair, double t, const TruncatedDomain& dom,
                                      const DiscretizeOptions& opt = {}) {
  return discretize_increment(pair, 0.0, t, dom, opt);
}

inline double kernel_l2_norm_sq(const KernelMatrix& km) {
  const Eigen::VectorXd& w = km.weights;
  return (km.values.array().square().matrix() * w).dot(w);
}

inline void require_same_domain(const KernelMatrix& a, const KernelMatrix& b) {
  if (!(a.domain == b.domain)) throw ValidationError("kernel matrices live on different domains");
}

inline double kernel_l2_distance_sq(const KernelMatrix& a, const KernelMatrix& b) {
  require_same_domain(a, b);
  if (a.t_begin != b.t_begin || a.t_end != b.t_end) {
    throw ValidationError("kernel matrices are evaluated at different times");
  }
  const Eigen::VectorXd& w = a.weights;
  return ((a.values - b.values).array().square().matrix() * w).dot(w);
}

// a - b on a shared domain (times may differ), e.g. increment kernels f(t) - f(s).
inline KernelMatrix kernel_difference(const KernelMatrix& a, const KernelMatrix& b, std::string label = {}) {
  require_same_domain(a, b);
  KernelMatrix out{a.domain, b.t_end, a.t_end, label.empty() ? a.label + " - " + b.label : std::move(label),
                   a.values - b.values, a.weights};
  return out;
}

// Rank-one-style coefficients (a_j b_k + a_k b_j)/2 with zero diagonal, wrapped as a kernel on the domain.
inline KernelMatrix coefficient_matrix(const TruncatedDomain& dom, Eigen::MatrixXd values, std::string label) {
  if (values.rows() != static_cast<Eigen::Index>(dom.size()) || values.cols() != values.rows()) {
    throw ValidationError("coefficient matrix size does not match the domain");
  }
  const Eigen::Index n = values.rows();
  KernelMatrix km{dom, 0.0, 0.0, std::move(label), std::move(values), Eigen::VectorXd(n)};
  for (std::size_t j = 0; j < dom.size(); ++j) km.weights[static_cast<Eigen::Index>(j)] = dom.width(j);
  return km;
}

struct TruncationResult {
  double L = 0.0;
  double shell_fraction = 0.0;
  int doublings = 0;
};

struct TruncationOptions {
  double budget_factor = 65536.0;  // L may not exceed budget_factor * T
  int cells_per_octave = 4;
  double min_width_fraction = 1.0 / 32.0;  // innermost cell width relative to t
  int refinement = 4;
  double tol = 1e-6;
};

// Smallest L = t * 2^k whose shell [-2L, -L] x [-2L, T] (and its mirror) carries less than tol of the
// discrete L^2 mass of f(t,.,.) on [-2L, T]^2. Throws NumericalError when L would exceed the budget.
inline TruncationResult choose_truncation(const HurstPair& pair, double t, double T, double tol,
                                          const TruncationOptions& opt = {}) {
  if (!(tol > 0.0 && tol < 1.0)) throw ValidationError("truncation tolerance must lie in (0, 1)");
  if (!(t > 0.0 && t <= T)) throw ValidationError("truncation time must lie in (0, T]");
  const double budget = opt.budget_factor * T;
  double L = t;
  TruncationResult last;
  for (int k = 0; L <= budget; ++k, L *= 2.0) {
    const auto dom = TruncatedDomain::focused(2.0 * L, T, 0.0, opt.min_width_fraction * t, opt.cells_per_octave,
                                              opt.refinement);
    const auto km = discretize_kernel(pair, t, dom, {opt.tol});
    const std::size_t M = dom.size();
    double total = 0.0, shell = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      for (std::size_t i = 0; i < M; ++i) {
        const double v = km.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        const double m = v * v * dom.width(j) * dom.width(i);
        total += m;
        if (dom.midpoint(j) < -L || dom.midpoint(i) < -L) shell += m;
      }
    }
    last = {L, total > 0.0 ? shell / total : 0.0, k};
    if (last.shell_fraction < tol) return last;
  }
  throw NumericalError("choose_truncation: budget exceeded (L > " + format_double(budget) +
                       ", shell fraction " + format_double(last.shell_fraction) + " at L=" + format_double(last.L) +
                       ", tolerance " + format_double(tol) + ")");
}

// Row-major CSV: comment header with metadata, then one line per row.
inline void write_kernel_csv(std::ostream& os, const KernelMatrix& km) {
  os << "# kernel " << km.label << "\n";
  os << "# domain " << km.domain.describe() << "\n";
  os << "# t_begin=" << format_double(km.t_begin) << " t_end=" << format_double(km.t_end) << "\n";
  os << "# edges";
  for (double e : km.domain.edges()) os << ' ' << format_double(e);
  os << "\n";
  for (Eigen::Index j = 0; j < km.values.rows(); ++j) {
    for (Eigen::Index k = 0; k < km.values.cols(); ++k) {
      if (k) os << ',';
      os << format_double(km.values(j, k));
    }
    os << "\n";
  }
}

}  // namespace rosen
