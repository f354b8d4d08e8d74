#pragma once

// Joint simulation of Y^{H1,H2} and the multifractional process X on a time grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rosen/chaos.hpp"
#include "rosen/error.hpp"
#include "rosen/hurst.hpp"
#include "rosen/kernel.hpp"

namespace rosen {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PathEnsemble {
  std::vector<double> times;
  RowMatrix values;  // n_samples x n_times
  std::string model;
  TruncatedDomain domain;
  std::uint64_t seed = 0;

  std::size_t samples() const { return static_cast<std::size_t>(values.rows()); }
  std::vector<double> column(std::size_t i) const {
    std::vector<double> c(samples());
    for (std::size_t s = 0; s < samples(); ++s) c[s] = values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i));
    return c;
  }
  // X_{t_j} - X_{t_i} for every sample
  std::vector<double> increment(std::size_t i, std::size_t j) const {
    std::vector<double> c(samples());
    for (std::size_t s = 0; s < samples(); ++s) {
      const auto r = static_cast<Eigen::Index>(s);
      c[s] = values(r, static_cast<Eigen::Index>(j)) - values(r, static_cast<Eigen::Index>(i));
    }
    return c;
  }
};

inline void check_time_grid(const std::vector<double>& times, const TruncatedDomain& dom) {
  if (times.empty()) throw ValidationError("time grid is empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || times[i] > dom.horizon()) throw ValidationError("time grid must lie in [0, T]");
    if (i > 0 && !(times[i] > times[i - 1])) throw ValidationError("time grid must be strictly increasing");
  }
}

// f(t_i) for every grid time, accumulated from increments int_{t_{i-1}}^{t_i} K ds.
inline std::vector<KernelMatrix> path_kernels(const HurstPair& pair, const std::vector<double>& times,
                                              const TruncatedDomain& dom, const DiscretizeOptions& opt = {}) {
  check_time_grid(times, dom);
  std::vector<KernelMatrix> out;
  out.reserve(times.size());
  double prev = 0.0;
  for (double t : times) {
    auto inc = discretize_increment(pair, prev, t, dom, opt);
    if (!out.empty()) {
      inc.values += out.back().values;
      inc.t_begin = 0.0;
    }
    out.push_back(std::move(inc));
    prev = t;
  }
  return out;
}

// f_{H(t_i)}(t_i) for every grid time.
inline std::vector<KernelMatrix> path_kernels(const HurstProfile& profile, const std::vector<double>& times,
                                              const TruncatedDomain& dom, const DiscretizeOptions& opt = {}) {
  check_time_grid(times, dom);
  std::vector<KernelMatrix> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(discretize_kernel(profile.at(t), t, dom, opt));
  return out;
}

// Sample s of every column shares one white-noise realization.
inline PathEnsemble simulate_from_kernels(const std::vector<KernelMatrix>& kernels, const std::vector<double>& times,
                                          std::size_t n, std::uint64_t seed, std::string model) {
  if (kernels.size() != times.size()) throw ValidationError("one kernel per grid time required");
  if (kernels.empty()) throw ValidationError("time grid is empty");
  PathEnsemble ens{times, RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(times.size())),
                   std::move(model), kernels.front().domain, seed};
  std::vector<const KernelMatrix*> ptrs;
  for (const auto& k : kernels) ptrs.push_back(&k);
  const auto cols = double_integral_ensemble(ptrs, n, seed);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (std::size_t s = 0; s < n; ++s) ens.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = cols[i][s];
  }
  return ens;
}

inline std::string describe(const HurstPair& p) {
  return "rosenblatt H1=" + format_double(p.h1()) + " H2=" + format_double(p.h2());
}

inline std::string describe(const HurstProfile& p) {
  std::string s = "multifractional";
  for (const auto& [k, v] : profile_to_key_values(p)) s += " " + k + "=" + v;
  return s;
}

// Same law and noise as simulate_from_kernels, holding one kernel at a time. kernel_at(i) is called
// in increasing order of i.
inline PathEnsemble simulate_streaming(const std::function<KernelMatrix(std::size_t)>& kernel_at,
                                       const std::vector<double>& times, const TruncatedDomain& dom, std::size_t n,
                                       std::uint64_t seed, std::string model) {
  check_time_grid(times, dom);
  const auto M = static_cast<Eigen::Index>(dom.size());
  const auto N = static_cast<Eigen::Index>(n);
  PathEnsemble ens{times, RowMatrix::Zero(N, static_cast<Eigen::Index>(times.size())), std::move(model), dom, seed};
  Eigen::MatrixXd Z(M, N);
  for (Eigen::Index s = 0; s < N; ++s) fill_white_noise(dom, seed, static_cast<std::uint64_t>(s), Z.col(s));
  const Eigen::MatrixXd Z2 = Z.array().square().matrix();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto km = kernel_at(i);
    if (!(km.domain == dom)) throw ValidationError("simulate_streaming: kernel domain differs");
    for (Eigen::Index b = 0; b < N; b += kSampleBlock) {
      const Eigen::Index cnt = std::min(kSampleBlock, N - b);
      const Eigen::MatrixXd AZ = km.values * Z.middleCols(b, cnt);
      const Eigen::RowVectorXd full = (Z.middleCols(b, cnt).array() * AZ.array()).colwise().sum();
      const Eigen::RowVectorXd diag = km.values.diagonal().transpose() * Z2.middleCols(b, cnt);
      ens.values.col(static_cast<Eigen::Index>(i)).segment(b, cnt) = (full - diag).transpose();
    }
  }
  return ens;
}

// Rosenblatt paths on a long grid from cumulative increments, one kernel in memory at a time.
inline PathEnsemble simulate_rosenblatt_streaming(const HurstPair& pair, const std::vector<double>& times,
                                                  const TruncatedDomain& dom, std::size_t n, std::uint64_t seed,
                                                  const DiscretizeOptions& opt = {}) {
  std::optional<KernelMatrix> acc;
  double prev = 0.0;
  auto next = [&](std::size_t i) {
    auto inc = discretize_increment(pair, prev, times[i], dom, opt);
    if (!acc) {
      acc = std::move(inc);
    } else {
      acc->values += inc.values;
      acc->t_end = inc.t_end;
    }
    prev = times[i];
    return *acc;
  };
  return simulate_streaming(next, times, dom, n, seed, describe(pair));
}

// f_{H(t_i)}(t_i) computed one time at a time.
inline PathEnsemble simulate_multifractional_streaming(const HurstProfile& profile, const std::vector<double>& times,
                                                       const TruncatedDomain& dom, std::size_t n, std::uint64_t seed,
                                                       const DiscretizeOptions& opt = {}) {
  const auto rep = validate_profile(profile);
  if (!rep.ok) throw ValidationError("invalid Hurst profile: " + rep.message);
  if (profile.kind() == ProfileKind::constant) {
    return simulate_rosenblatt_streaming(profile.at(0.0), times, dom, n, seed, opt);
  }
  auto next = [&](std::size_t i) { return discretize_kernel(profile.at(times[i]), times[i], dom, opt); };
  return simulate_streaming(next, times, dom, n, seed, describe(profile));
}

inline PathEnsemble simulate_rosenblatt(const HurstPair& pair, const std::vector<double>& times,
                                        const TruncatedDomain& dom, std::size_t n, std::uint64_t seed,
                                        const DiscretizeOptions& opt = {}) {
  return simulate_from_kernels(path_kernels(pair, times, dom, opt), times, n, seed, describe(pair));
}

inline PathEnsemble simulate_multifractional(const HurstProfile& profile, const std::vector<double>& times,
                                             const TruncatedDomain& dom, std::size_t n, std::uint64_t seed,
                                             const DiscretizeOptions& opt = {}) {
  const auto rep = validate_profile(profile);
  if (!rep.ok) throw ValidationError("invalid Hurst profile: " + rep.message);
  if (profile.kind() == ProfileKind::constant) {
    return simulate_rosenblatt(profile.at(0.0), times, dom, n, seed, opt);
  }
  return simulate_from_kernels(path_kernels(profile, times, dom, opt), times, n, seed, describe(profile));
}

struct MomentEstimate {
  int order = 0;
  double value = 0.0;
  double se = 0.0;  // jackknife standard error
};

// Leave-one-out jackknife of a smooth function of sample means.
inline double jackknife_se(std::size_t n, const auto& leave_one_out) {
  if (n < 2) return 0.0;
  std::vector<double> th(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    th[i] = leave_one_out(i);
    mean += th[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : th) ss += (v - mean) * (v - mean);
  return std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
}

// E(X_t - X_s)^m for m in orders (each 2 or 4).
inline std::vector<MomentEstimate> increment_moments(const PathEnsemble& ens, std::size_t s_index, std::size_t t_index,
                                                     const std::vector<int>& orders) {
  if (s_index >= ens.times.size() || t_index >= ens.times.size()) throw ValidationError("time index out of range");
  const auto d = ens.increment(s_index, t_index);
  const std::size_t n = d.size();
  std::vector<MomentEstimate> out;
  for (int m : orders) {
    if (m != 2 && m != 4) throw ValidationError("increment_moments: orders must be 2 or 4");
    std::vector<double> p(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = std::pow(d[i], m);
      sum += p[i];
    }
    const double value = n ? sum / static_cast<double>(n) : 0.0;
    const double se = jackknife_se(n, [&](std::size_t i) { return (sum - p[i]) / static_cast<double>(n - 1); });
    out.push_back({m, value, se});
  }
  return out;
}

// m4 / m2^2 of increments with its jackknife standard error.
inline MomentEstimate increment_kurtosis_ratio(const PathEnsemble& ens, std::size_t s_index, std::size_t t_index) {
  const auto d = ens.increment(s_index, t_index);
  const std::size_t n = d.size();
  double s2 = 0.0, s4 = 0.0;
  for (double v : d) {
    s2 += v * v;
    s4 += v * v * v * v;
  }
  auto ratio = [&](double a2, double a4, double cnt) { return (a4 / cnt) / ((a2 / cnt) * (a2 / cnt)); };
  const double value = ratio(s2, s4, static_cast<double>(n));
  const double se = jackknife_se(n, [&](std::size_t i) {
    const double v2 = d[i] * d[i];
    return ratio(s2 - v2, s4 - v2 * v2, static_cast<double>(n - 1));
  });
  return {4, value, se};
}

// Wide CSV: one row per sample, metadata header with seed, domain and model.
inline void write_paths_csv(std::ostream& os, const PathEnsemble& ens, const std::string& metadata) {
  os << "# " << metadata << "\n";
  os << "# model " << ens.model << "\n";
  os << "# domain " << ens.domain.describe() << " seed=" << ens.seed << "\n";
  os << "sample";
  for (double t : ens.times) os << ",t=" << format_double(t);
  os << "\n";
  for (Eigen::Index s = 0; s < ens.values.rows(); ++s) {
    os << s;
    for (Eigen::Index i = 0; i < ens.values.cols(); ++i) os << ',' << format_double(ens.values(s, i));
    os << "\n";
  }
}

}  // namespace rosen
