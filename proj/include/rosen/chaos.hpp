#pragma once

// Single and double Wiener integrals of simple functions on a truncated domain.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rosen/domain.hpp"
#include "rosen/error.hpp"
#include "rosen/kernel.hpp"
#include "rosen/random.hpp"

namespace rosen {

// One realization of the cell increments W(A_j), independent N(0, w_j).
struct WhiteNoiseGrid {
  TruncatedDomain domain;
  Eigen::VectorXd increments;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

// Fills z with N(0, w_j) increments for sample `index` of `seed`.
inline void fill_white_noise(const TruncatedDomain& dom, std::uint64_t seed, std::uint64_t index,
                             Eigen::Ref<Eigen::VectorXd> z) {
  RandomStream rng(seed, stream_id("white-noise", index));
  for (std::size_t j = 0; j < dom.size(); ++j) z[static_cast<Eigen::Index>(j)] = std::sqrt(dom.width(j)) * rng.normal();
}

inline WhiteNoiseGrid sample_white_noise(const TruncatedDomain& dom, std::uint64_t seed, std::uint64_t index = 0) {
  WhiteNoiseGrid g{dom, Eigen::VectorXd(static_cast<Eigen::Index>(dom.size())), seed, index};
  fill_white_noise(dom, seed, index, g.increments);
  return g;
}

// I_1(a) = sum_j a_j W(A_j).
inline double single_integral(std::span<const double> coeffs, const WhiteNoiseGrid& noise) {
  if (coeffs.size() != static_cast<std::size_t>(noise.increments.size())) {
    throw ValidationError("single_integral: coefficient length does not match the noise grid");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) s += coeffs[j] * noise.increments[static_cast<Eigen::Index>(j)];
  return s;
}

inline double single_integral(const Eigen::VectorXd& coeffs, const WhiteNoiseGrid& noise) {
  return single_integral(std::span<const double>(coeffs.data(), static_cast<std::size_t>(coeffs.size())), noise);
}

// sum_{j != k} a_jk z_j z_k for a symmetric coefficient matrix.
inline double quadratic_form_offdiag(const Eigen::MatrixXd& a, const Eigen::VectorXd& z) {
  return z.dot(a * z) - (a.diagonal().array() * z.array().square()).sum();
}

// I_2(f) = sum_{j != k} a_jk W(A_j) W(A_k).
inline double double_integral(const KernelMatrix& km, const WhiteNoiseGrid& noise) {
  if (!(km.domain == noise.domain)) throw ValidationError("double_integral: kernel and noise domains differ");
  return quadratic_form_offdiag(km.values, noise.increments);
}

// (a(x)b(y) + a(y)b(x))/2 with the diagonal set to zero.
inline Eigen::MatrixXd symmetric_tensor(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ValidationError("symmetric_tensor: lengths differ");
  Eigen::MatrixXd m = 0.5 * (a * b.transpose() + b * a.transpose());
  m.diagonal().setZero();
  return m;
}

inline KernelMatrix symmetric_tensor(const TruncatedDomain& dom, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return coefficient_matrix(dom, symmetric_tensor(a, b), "tensor");
}

// Fixed sample-block width for batched quadratic forms; results do not depend on thread count.
inline constexpr Eigen::Index kSampleBlock = 64;

// n samples of I_2 for each kernel, sharing the noise of sample i across kernels.
// Returns one vector per kernel.
inline std::vector<std::vector<double>> double_integral_ensemble(const std::vector<const KernelMatrix*>& kernels,
                                                                 std::size_t n, std::uint64_t seed,
                                                                 std::uint64_t first_index = 0) {
  if (kernels.empty()) return {};
  const auto& dom = kernels.front()->domain;
  for (auto* k : kernels) {
    if (!(k->domain == dom)) throw ValidationError("double_integral_ensemble: kernels live on different domains");
  }
  const auto M = static_cast<Eigen::Index>(dom.size());
  std::vector<std::vector<double>> out(kernels.size(), std::vector<double>(n));
  const auto blocks = static_cast<std::ptrdiff_t>((n + kSampleBlock - 1) / kSampleBlock);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t start = static_cast<std::size_t>(b) * kSampleBlock;
    const std::size_t cnt = std::min<std::size_t>(kSampleBlock, n - start);
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(M, kSampleBlock);
    for (std::size_t c = 0; c < cnt; ++c) fill_white_noise(dom, seed, first_index + start + c, Z.col(static_cast<Eigen::Index>(c)));
    const Eigen::MatrixXd Z2 = Z.array().square().matrix();
    for (std::size_t q = 0; q < kernels.size(); ++q) {
      const Eigen::MatrixXd& A = kernels[q]->values;
      const Eigen::MatrixXd AZ = A * Z;
      const Eigen::RowVectorXd full = (Z.array() * AZ.array()).colwise().sum();
      const Eigen::RowVectorXd diag = A.diagonal().transpose() * Z2;
      for (std::size_t c = 0; c < cnt; ++c) out[q][start + c] = full[static_cast<Eigen::Index>(c)] - diag[static_cast<Eigen::Index>(c)];
    }
  }
  return out;
}

inline std::vector<double> double_integral_ensemble(const KernelMatrix& km, std::size_t n, std::uint64_t seed) {
  return double_integral_ensemble(std::vector<const KernelMatrix*>{&km}, n, seed).front();
}

// Single-column CSV with a metadata header.
inline void write_samples_csv(std::ostream& os, std::span<const double> samples, const std::string& metadata) {
  os << "# " << metadata << "\n";
  os << "value\n";
  for (double v : samples) os << format_double(v) << "\n";
}

}  // namespace rosen
