#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace afdm {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using CMatrixX = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using CVectorX = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using cd = std::complex<double>;
using CMatrix = CMatrixX<double>;
using CVector = CVectorX<double>;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Bit-exact reproducible generator; every random draw in the library goes
/// through a caller-supplied instance.
using Rng = std::mt19937_64;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Sample from CN(0, variance).
inline cd complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> dist(0.0, std::sqrt(variance / 2.0));
  const double re = dist(rng);
  const double im = dist(rng);
  return {re, im};
}

inline CVector complex_normal_vector(Rng& rng, Index n, double variance) {
  CVector v(n);
  std::normal_distribution<double> dist(0.0, std::sqrt(variance / 2.0));
  for (Index i = 0; i < n; ++i) {
    const double re = dist(rng);
    const double im = dist(rng);
    v(i) = cd(re, im);
  }
  return v;
}

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-trial seed from (master seed, stream, counter). Every Monte-Carlo
/// trial owns its generator, so results do not depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t counter) {
  return mix64(mix64(mix64(master) ^ stream) ^ (counter * 0xd1b54a32d192ed03ULL));
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace afdm
