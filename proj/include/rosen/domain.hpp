#pragma once

// Truncations of the real line to [-L, T] partitioned into cells.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rosen/error.hpp"
#include "rosen/util.hpp"

namespace rosen {

enum class Grading { uniform, graded, focused };

inline std::string to_string(Grading g) {
  switch (g) {
    case Grading::uniform: return "uniform";
    case Grading::graded: return "graded";
    case Grading::focused: return "focused";
  }
  return "?";
}

inline Grading grading_from_string(const std::string& s) {
  if (s == "uniform") return Grading::uniform;
  if (s == "graded") return Grading::graded;
  if (s == "focused") return Grading::focused;
  throw ValidationError("unknown grading '" + s + "'");
}

class TruncatedDomain {
 public:
  // M equal cells on [-L, T].
  static TruncatedDomain uniform(double L, double T, std::size_t M, int refinement = 8) {
    check_common(L, T, refinement);
    if (M < 1) throw ValidationError("domain needs at least one cell");
    std::vector<double> e(M + 1);
    const double span = L + T;
    for (std::size_t k = 0; k <= M; ++k) e[k] = -L + span * static_cast<double>(k) / static_cast<double>(M);
    e.front() = -L;
    e.back() = T;
    return TruncatedDomain(Grading::uniform, L, T, std::move(e), refinement);
  }

  // Uniform cells inside [0, T]; to the left, widths grow by 1/ratio per cell until -L is reached.
  // The number of tail cells is the smallest that reaches -L at the nominal ratio; the growth rate
  // is then lowered so the last edge lands exactly on -L. Total cell count is M.
  static TruncatedDomain graded(double L, double T, std::size_t M, double ratio = 0.9, int refinement = 8) {
    check_common(L, T, refinement);
    if (M < 2) throw ValidationError("graded domain needs at least two cells");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("grading ratio must lie in (0, 1)");
    const double q = 1.0 / ratio;
    auto tail_length = [](double h, double growth, std::size_t n) {
      if (growth == 1.0) return h * static_cast<double>(n);
      return h * (std::pow(growth, static_cast<double>(n)) - 1.0) / (growth - 1.0);
    };
    std::size_t n_out = 1;
    double h = 0.0;
    for (;; ++n_out) {
      if (n_out >= M) throw ValidationError("graded domain: M too small to reach the left cut at this ratio");
      h = T / static_cast<double>(M - n_out);
      if (tail_length(h, q, n_out) >= L) break;
    }
    if (h * static_cast<double>(n_out) > L) {
      throw ValidationError("graded domain: left cut " + format_double(L) + " is shorter than " +
                            std::to_string(n_out) + " interior-width cells");
    }
    // Solve tail_length(h, g, n_out) = L for g in [1, q].
    double lo = 1.0, hi = q;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tail_length(h, mid, n_out) < L ? lo : hi) = mid;
    }
    const double g = 0.5 * (lo + hi);
    const std::size_t n_in = M - n_out;
    std::vector<double> e;
    e.reserve(M + 1);
    std::vector<double> tail(n_out);
    double x = 0.0, w = h;
    for (std::size_t k = 0; k < n_out; ++k) {
      x -= w;
      tail[k] = x;
      w *= g;
    }
    tail.back() = -L;
    for (std::size_t k = n_out; k-- > 0;) e.push_back(tail[k]);
    for (std::size_t k = 0; k <= n_in; ++k) e.push_back(T * static_cast<double>(k) / static_cast<double>(n_in));
    e.back() = T;
    return TruncatedDomain(Grading::graded, L, T, std::move(e), refinement);
  }

  // Cells log-uniform in the distance to a focus point p in [0, T]: a central cell [p-w, p+w] and
  // edges at p -/+ w*2^(i/m). The outermost remnant on each side is merged into its neighbour when
  // it is narrower than half of that neighbour.
  static TruncatedDomain focused(double L, double T, double focus, double min_width, int cells_per_octave,
                                 int refinement = 8) {
    check_common(L, T, refinement);
    if (!(focus >= 0.0 && focus <= T)) throw ValidationError("focus must lie in [0, T]");
    if (!(min_width > 0.0)) throw ValidationError("focused domain: min_width must be positive");
    if (cells_per_octave < 1) throw ValidationError("focused domain: cells_per_octave must be >= 1");
    const double step = std::exp2(1.0 / cells_per_octave);
    auto side = [&](double extent) {
      // distances from the focus, ending exactly at extent
      std::vector<double> d;
      if (extent <= 0.0) return d;
      double r = min_width;
      while (r < extent) {
        d.push_back(r);
        r *= step;
      }
      if (d.size() >= 2 && extent - d.back() < 0.5 * (d.back() - d[d.size() - 2])) d.pop_back();
      else if (d.size() == 1 && extent - d.back() < 0.5 * d.back()) d.pop_back();
      d.push_back(extent);
      return d;
    };
    const auto left = side(focus + L);
    const auto right = side(T - focus);
    std::vector<double> e;
    e.reserve(left.size() + right.size() + 1);
    for (auto it = left.rbegin(); it != left.rend(); ++it) e.push_back(focus - *it);
    if (right.empty() || left.empty()) e.push_back(focus);
    for (double r : right) e.push_back(focus + r);
    e.front() = -L;
    e.back() = T;
    return TruncatedDomain(Grading::focused, L, T, std::move(e), refinement);
  }

  // Arbitrary strictly increasing edges from -L to T.
  static TruncatedDomain from_edges(std::vector<double> edges, Grading g = Grading::uniform, int refinement = 8) {
    if (edges.size() < 2) throw ValidationError("domain needs at least one cell");
    const double L = -edges.front(), T = edges.back();
    check_common(L, T, refinement);
    return TruncatedDomain(g, L, T, std::move(edges), refinement);
  }

  Grading grading() const noexcept { return grading_; }
  double left_cut() const noexcept { return L_; }
  double horizon() const noexcept { return T_; }
  int refinement() const noexcept { return refinement_; }
  std::size_t size() const noexcept { return edges_.size() - 1; }
  const std::vector<double>& edges() const noexcept { return edges_; }
  double left(std::size_t j) const { return edges_[j]; }
  double right(std::size_t j) const { return edges_[j + 1]; }
  double width(std::size_t j) const { return edges_[j + 1] - edges_[j]; }
  double midpoint(std::size_t j) const { return 0.5 * (edges_[j] + edges_[j + 1]); }
  std::vector<double> widths() const {
    std::vector<double> w(size());
    for (std::size_t j = 0; j < size(); ++j) w[j] = width(j);
    return w;
  }

  std::string describe() const {
    return "grading=" + to_string(grading_) + " L=" + format_double(L_) + " T=" + format_double(T_) +
           " M=" + std::to_string(size()) + " refinement=" + std::to_string(refinement_);
  }

  friend bool operator==(const TruncatedDomain& a, const TruncatedDomain& b) {
    return a.grading_ == b.grading_ && a.refinement_ == b.refinement_ && a.edges_ == b.edges_;
  }

 private:
  TruncatedDomain(Grading g, double L, double T, std::vector<double> edges, int refinement)
      : grading_(g), L_(L), T_(T), edges_(std::move(edges)), refinement_(refinement) {
    for (std::size_t j = 0; j + 1 < edges_.size(); ++j) {
      if (!(edges_[j + 1] > edges_[j])) throw ValidationError("domain edges must be strictly increasing");
    }
  }

  static void check_common(double L, double T, int refinement) {
    if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("left cut L must be positive and finite");
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("horizon T must be positive and finite");
    if (refinement < 1) throw ValidationError("refinement factor must be >= 1");
  }

  Grading grading_;
  double L_;
  double T_;
  std::vector<double> edges_;
  int refinement_;
};

}  // namespace rosen
