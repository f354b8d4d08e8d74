#pragma once

// Hurst parameters: constant pairs and time-dependent profiles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rosen/error.hpp"
#include "rosen/util.hpp"

namespace rosen {

// Values closer than this to 1/2 or 1 are rejected.
inline constexpr double kHurstBoundaryTol = 1e-9;

inline bool hurst_in_range(double h) {
  return h > 0.5 + kHurstBoundaryTol && h < 1.0 - kHurstBoundaryTol;
}

class HurstPair {
 public:
  HurstPair(double h1, double h2) : h1_(h1), h2_(h2) {
    if (!hurst_in_range(h1) || !hurst_in_range(h2)) {
      throw ValidationError("Hurst pair (" + format_double(h1) + ", " + format_double(h2) +
                            ") must lie strictly inside (1/2, 1)");
    }
  }

  double h1() const noexcept { return h1_; }
  double h2() const noexcept { return h2_; }
  // Kernel exponents H_i/2 - 1, both in (-3/4, -1/2).
  double exponent1() const noexcept { return 0.5 * h1_ - 1.0; }
  double exponent2() const noexcept { return 0.5 * h2_ - 1.0; }
  double exponent_sum() const noexcept { return h1_ + h2_; }
  // Y^{H1,H2} is self-similar with this index.
  double self_similarity_index() const noexcept { return 0.5 * (h1_ + h2_); }
  HurstPair swapped() const { return {h2_, h1_}; }

  friend bool operator==(const HurstPair&, const HurstPair&) = default;

 private:
  double h1_;
  double h2_;
};

enum class ProfileKind { constant, affine, sinusoidal };

inline std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::affine: return "affine";
    case ProfileKind::sinusoidal: return "sinusoidal";
  }
  return "?";
}

// One coordinate H_i(t). Affine: base + slope*t. Sinusoidal: base + amplitude*sin(2*pi*frequency*t).
struct ProfileCoordinate {
  double base = 0.75;
  double slope = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;

  friend bool operator==(const ProfileCoordinate&, const ProfileCoordinate&) = default;
};

struct ProfileExtrema {
  double min_h1, max_h1, min_h2, max_h2;
  double lower() const noexcept { return 0.5 * (min_h1 + min_h2); }  // H underbar
  double upper() const noexcept { return 0.5 * (max_h1 + max_h2); }  // H bar
};

class HurstProfile {
 public:
  HurstProfile(ProfileKind kind, ProfileCoordinate c1, ProfileCoordinate c2, double horizon, double gamma)
      : kind_(kind), coord_{c1, c2}, horizon_(horizon), gamma_(gamma) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("profile horizon T must be positive");
    if (!std::isfinite(gamma)) throw ValidationError("profile gamma must be finite");
  }

  static HurstProfile constant(double h1, double h2, double horizon, double gamma) {
    return {ProfileKind::constant, {h1}, {h2}, horizon, gamma};
  }
  static HurstProfile affine(double base1, double slope1, double base2, double slope2, double horizon,
                             double gamma) {
    return {ProfileKind::affine, {base1, slope1}, {base2, slope2}, horizon, gamma};
  }
  static HurstProfile sinusoidal(double base1, double amp1, double freq1, double base2, double amp2,
                                 double freq2, double horizon, double gamma) {
    return {ProfileKind::sinusoidal, {base1, 0.0, amp1, freq1}, {base2, 0.0, amp2, freq2}, horizon, gamma};
  }

  ProfileKind kind() const noexcept { return kind_; }
  const ProfileCoordinate& coordinate(int i) const { return coord_.at(static_cast<std::size_t>(i)); }
  double horizon() const noexcept { return horizon_; }
  double gamma() const noexcept { return gamma_; }

  double value(int i, double t) const {
    const auto& c = coordinate(i);
    switch (kind_) {
      case ProfileKind::constant: return c.base;
      case ProfileKind::affine: return c.base + c.slope * t;
      case ProfileKind::sinusoidal: return c.base + c.amplitude * std::sin(2.0 * kPi * c.frequency * t);
    }
    return c.base;
  }

  // Throws ValidationError when H_i(t) is outside (1/2, 1).
  HurstPair at(double t) const { return {value(0, t), value(1, t)}; }

  friend bool operator==(const HurstProfile&, const HurstProfile&) = default;

 private:
  ProfileKind kind_;
  std::array<ProfileCoordinate, 2> coord_;
  double horizon_;
  double gamma_;
};

namespace detail {

// True if some point c + 2*pi*k lies in [lo, hi].
inline bool phase_hits(double c, double lo, double hi) {
  const double k = std::ceil((lo - c) / (2.0 * kPi));
  return c + 2.0 * kPi * k <= hi;
}

inline std::pair<double, double> coordinate_extrema(ProfileKind kind, const ProfileCoordinate& c, double T) {
  switch (kind) {
    case ProfileKind::constant: return {c.base, c.base};
    case ProfileKind::affine: {
      const double end = c.base + c.slope * T;
      return {std::min(c.base, end), std::max(c.base, end)};
    }
    case ProfileKind::sinusoidal: {
      const double hi = 2.0 * kPi * c.frequency * T;
      const double lo = std::min(0.0, hi);
      const double up = std::max(0.0, hi);
      double smax = std::max(std::sin(lo), std::sin(up));
      double smin = std::min(std::sin(lo), std::sin(up));
      if (phase_hits(0.5 * kPi, lo, up)) smax = 1.0;
      if (phase_hits(1.5 * kPi, lo, up)) smin = -1.0;
      const double a = c.base + c.amplitude * smin;
      const double b = c.base + c.amplitude * smax;
      return {std::min(a, b), std::max(a, b)};
    }
  }
  return {c.base, c.base};
}

}  // namespace detail

// Closed-form extrema of each coordinate over [0, T].
inline ProfileExtrema profile_extrema(const HurstProfile& p) {
  const auto [m1, M1] = detail::coordinate_extrema(p.kind(), p.coordinate(0), p.horizon());
  const auto [m2, M2] = detail::coordinate_extrema(p.kind(), p.coordinate(1), p.horizon());
  return {m1, M1, m2, M2};
}

enum class ProfileViolation { none, range, holder, gamma };

struct ValidationReport {
  bool ok = true;
  ProfileViolation violation = ProfileViolation::none;
  int coordinate = -1;  // offending coordinate (0 or 1) where applicable
  double s = 0.0;
  double t = 0.0;
  std::string message;
};

namespace detail {

struct HolderFailure {
  bool failed = false;
  double s = 0.0, t = 0.0;
};

// Sufficient analytic condition for |H(t)-H(s)| <= |t-s|^gamma on [0, T].
inline HolderFailure analytic_holder(ProfileKind kind, const ProfileCoordinate& c, double T, double gamma) {
  switch (kind) {
    case ProfileKind::constant: return {};
    case ProfileKind::affine: {
      const double k = std::abs(c.slope);
      if (k == 0.0) return {};
      if (gamma <= 1.0) {
        // k*d <= d^gamma  <=>  k <= d^(gamma-1); tightest at d = T.
        if (k > std::pow(T, gamma - 1.0)) return {true, 0.0, T};
        return {};
      }
      const double d = std::min(T, 0.5 * std::pow(k, 1.0 / (gamma - 1.0)));
      return {true, 0.0, d};
    }
    case ProfileKind::sinusoidal: {
      // sup_t |dH| at lag d is 2|A||sin(pi nu d)| <= 2|A| min(1, pi nu d).
      const double A = std::abs(c.amplitude);
      const double nu = std::abs(c.frequency);
      if (A == 0.0 || nu == 0.0) return {};
      if (gamma > 1.0) return {true, 0.0, std::min(T, 1e-6)};
      const double dstar = 1.0 / (kPi * nu);
      const double d1 = std::min(T, dstar);
      if (2.0 * A * kPi * nu > std::pow(d1, gamma - 1.0)) return {true, 0.0, d1};
      if (T > dstar && 2.0 * A > std::pow(dstar, gamma)) return {true, 0.0, dstar};
      return {};
    }
  }
  return {};
}

}  // namespace detail

// Range, Hölder (analytic bound plus an all-pairs scan of a uniform grid) and gamma > H bar.
inline ValidationReport validate_profile(const HurstProfile& p, std::size_t grid_points = 1024) {
  if (grid_points < 2) throw std::invalid_argument("validate_profile: grid_points must be >= 2");
  ValidationReport rep;
  const double T = p.horizon();
  const auto ex = profile_extrema(p);

  const std::array<std::pair<double, double>, 2> ranges{{{ex.min_h1, ex.max_h1}, {ex.min_h2, ex.max_h2}}};
  for (int i = 0; i < 2; ++i) {
    const auto [lo, hi] = ranges[static_cast<std::size_t>(i)];
    if (!hurst_in_range(lo) || !hurst_in_range(hi)) {
      rep.ok = false;
      rep.violation = ProfileViolation::range;
      rep.coordinate = i;
      // locate the first grid point outside the range for the report
      for (std::size_t k = 0; k < grid_points; ++k) {
        const double t = T * static_cast<double>(k) / static_cast<double>(grid_points - 1);
        if (!hurst_in_range(p.value(i, t))) {
          rep.s = rep.t = t;
          break;
        }
      }
      rep.message = "range: H" + std::to_string(i + 1) + " takes values in [" + format_double(lo) + ", " +
                    format_double(hi) + "], outside (1/2, 1)";
      return rep;
    }
  }

  const double gamma = p.gamma();
  const double slack = 1e-12;
  for (int i = 0; i < 2; ++i) {
    // grid scan over all pairs
    std::vector<double> grid(grid_points), vals(grid_points);
    for (std::size_t k = 0; k < grid_points; ++k) {
      grid[k] = T * static_cast<double>(k) / static_cast<double>(grid_points - 1);
      vals[k] = p.value(i, grid[k]);
    }
    for (std::size_t a = 0; a < grid_points; ++a) {
      for (std::size_t b = a + 1; b < grid_points; ++b) {
        const double d = grid[b] - grid[a];
        if (std::abs(vals[b] - vals[a]) > std::pow(d, gamma) * (1.0 + slack)) {
          rep.ok = false;
          rep.violation = ProfileViolation::holder;
          rep.coordinate = i;
          rep.s = grid[a];
          rep.t = grid[b];
          rep.message = "holder: |H" + std::to_string(i + 1) + "(t)-H" + std::to_string(i + 1) +
                        "(s)| > |t-s|^gamma at s=" + format_double(grid[a]) + ", t=" + format_double(grid[b]);
          return rep;
        }
      }
    }
    const auto af = detail::analytic_holder(p.kind(), p.coordinate(i), T, gamma);
    if (af.failed) {
      rep.ok = false;
      rep.violation = ProfileViolation::holder;
      rep.coordinate = i;
      rep.s = af.s;
      rep.t = af.t;
      rep.message = "holder: analytic bound for H" + std::to_string(i + 1) + " exceeds |t-s|^gamma at s=" +
                    format_double(af.s) + ", t=" + format_double(af.t);
      return rep;
    }
  }

  if (!(gamma > ex.upper())) {
    rep.ok = false;
    rep.violation = ProfileViolation::gamma;
    rep.message = "gamma = " + format_double(gamma) + " must exceed H bar = " + format_double(ex.upper());
    return rep;
  }
  return rep;
}

// Flat key/value form: kind, h1, h2, slope1, slope2, amplitude1, amplitude2, frequency1, frequency2, T, gamma.
inline KeyValues profile_to_key_values(const HurstProfile& p) {
  KeyValues kv;
  kv["kind"] = to_string(p.kind());
  for (int i = 0; i < 2; ++i) {
    const auto& c = p.coordinate(i);
    const std::string n = std::to_string(i + 1);
    kv["h" + n] = format_double(c.base);
    if (p.kind() == ProfileKind::affine) kv["slope" + n] = format_double(c.slope);
    if (p.kind() == ProfileKind::sinusoidal) {
      kv["amplitude" + n] = format_double(c.amplitude);
      kv["frequency" + n] = format_double(c.frequency);
    }
  }
  kv["T"] = format_double(p.horizon());
  kv["gamma"] = format_double(p.gamma());
  return kv;
}

inline HurstProfile profile_from_key_values(const KeyValues& kv, const std::string& section = "model") {
  auto get = [&](const std::string& key, std::optional<double> fallback) -> double {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (fallback) return *fallback;
      throw ConfigError("missing key '" + key + "'", section + "." + key);
    }
    auto v = parse_double(it->second);
    if (!v) throw ConfigError("not a number: '" + it->second + "'", section + "." + key);
    return *v;
  };
  ProfileKind kind = ProfileKind::constant;
  if (auto it = kv.find("kind"); it != kv.end()) {
    if (it->second == "constant") kind = ProfileKind::constant;
    else if (it->second == "affine") kind = ProfileKind::affine;
    else if (it->second == "sinusoidal") kind = ProfileKind::sinusoidal;
    else throw ConfigError("unknown profile kind '" + it->second + "'", section + ".kind");
  }
  ProfileCoordinate c[2];
  for (int i = 0; i < 2; ++i) {
    const std::string n = std::to_string(i + 1);
    c[i].base = get("h" + n, std::nullopt);
    c[i].slope = get("slope" + n, 0.0);
    c[i].amplitude = get("amplitude" + n, 0.0);
    c[i].frequency = get("frequency" + n, 0.0);
  }
  return {kind, c[0], c[1], get("T", 1.0), get("gamma", 0.99)};
}

}  // namespace rosen
