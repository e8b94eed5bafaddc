// modem.hpp - DAFT matrix, chirp-periodic prefix and AFDM waveform geometry
//
// The DAFT matrix is A = Lambda(c2) * F * Lambda(c1) with
// Lambda(c) = diag(exp(-i 2 pi c n^2)) and F the unitary DFT. Modulation maps
// DAFT-domain symbols to time samples with A^H, demodulation applies A.
// c1 = c2 = 0 reduces everything to plain OFDM.

#pragma once

#include "afdm/types.hpp"

#include <stdexcept>

namespace afdm {

/// Waveform geometry and chirp parameters.
struct AfdmParams {
  int N = 64;          ///< chirp subcarriers
  double c1 = 0.0;     ///< first chirp parameter
  double c2 = 0.0;     ///< second chirp parameter
  int cpp_len = 0;     ///< prefix length in samples
  int k_max = 0;       ///< integer Doppler budget
  int k_nu = 0;        ///< fractional-Doppler guard
  int l_max = 0;       ///< maximum normalized delay
  double delta_f = 15e3;
  double f_c = 4e9;

  double symbol_duration() const { return 1.0 / delta_f; }
  double sample_period() const { return 1.0 / (N * delta_f); }
  double sample_rate() const { return N * delta_f; }

  /// Throws std::invalid_argument when a geometry invariant is violated.
  void validate() const;

  /// AFDM geometry with c1 from the full-diversity rule, c2 = default_c2(N)
  /// and the prefix sized to l_max.
  static AfdmParams afdm(int N, int k_max, int k_nu, int l_max);

  /// Same geometry with c1 = c2 = 0 (plain OFDM with a cyclic prefix).
  static AfdmParams ofdm(int N, int k_max, int k_nu, int l_max);
};

/// 2 (k_max + k_nu)(l_max + 1) + l_max < N.
bool satisfies_dimension_constraint(int k_max, int k_nu, int l_max, int N);

/// c1 = (2 (k_max + k_nu) + 1) / (2N).
double select_c1(int k_max, int k_nu, int N);

/// Small irrational default for c2: 1 / (2 N^2 pi).
double default_c2(int N);

template <typename Scalar = double>
CVectorX<Scalar> chirp_diagonal(int N, Scalar c) {
  CVectorX<Scalar> d(N);
  for (int n = 0; n < N; ++n) {
    // c n^2 is reduced mod 1 in long double before the trig call; n^2 grows
    // quickly and the raw product loses the fractional digits.
    const long double phase = static_cast<long double>(c) * n * n;
    const long double frac = phase - std::floor(phase);
    d(n) = std::polar(Scalar(1), static_cast<Scalar>(-2.0L * std::numbers::pi_v<long double> * frac));
  }
  return d;
}

template <typename Scalar = double>
CMatrixX<Scalar> dft_matrix(int N) {
  CMatrixX<Scalar> F(N, N);
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(N));
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < N; ++k) {
      const long long idx = (static_cast<long long>(n) * k) % N;
      F(n, k) = std::polar(scale, static_cast<Scalar>(-2.0L * std::numbers::pi_v<long double> * idx / N));
    }
  }
  return F;
}

/// DAFT matrix for raw (N, c1, c2); N = 1 gives [1].
template <typename Scalar = double>
CMatrixX<Scalar> build_daft_matrix(int N, Scalar c1, Scalar c2) {
  if (N < 1) throw std::invalid_argument("build_daft_matrix: N must be positive");
  const CVectorX<Scalar> l1 = chirp_diagonal<Scalar>(N, c1);
  const CVectorX<Scalar> l2 = chirp_diagonal<Scalar>(N, c2);
  return l2.asDiagonal() * dft_matrix<Scalar>(N) * l1.asDiagonal();
}

template <typename Scalar = double>
CMatrixX<Scalar> build_daft_matrix(const AfdmParams& params) {
  params.validate();
  return build_daft_matrix<Scalar>(params.N, static_cast<Scalar>(params.c1),
                                   static_cast<Scalar>(params.c2));
}

/// s = A^H x.
template <typename Derived>
CVectorX<typename Derived::RealScalar> modulate(const Eigen::MatrixBase<Derived>& x,
                                                const AfdmParams& params) {
  using Scalar = typename Derived::RealScalar;
  if (x.size() != params.N) throw std::invalid_argument("modulate: length mismatch");
  return build_daft_matrix<Scalar>(params).adjoint() * x;
}

/// y = A r.
template <typename Derived>
CVectorX<typename Derived::RealScalar> demodulate(const Eigen::MatrixBase<Derived>& r,
                                                  const AfdmParams& params) {
  using Scalar = typename Derived::RealScalar;
  if (r.size() != params.N) throw std::invalid_argument("demodulate: length mismatch");
  return build_daft_matrix<Scalar>(params) * r;
}

/// Prepends the chirp-periodic prefix:
/// s(n) = s(N + n) exp(-i 2 pi c1 (N^2 + 2 N n)), n = -L..-1.
CVector add_cpp(const CVector& s, const AfdmParams& params);

/// Drops the first cpp_len samples.
CVector remove_cpp(const CVector& r, const AfdmParams& params);

/// Caches A and A^H for repeated use on one geometry.
class Modem {
 public:
  explicit Modem(const AfdmParams& params);

  const AfdmParams& params() const { return params_; }
  const CMatrix& daft() const { return a_; }
  const CMatrix& daft_adjoint() const { return a_h_; }

  CVector modulate(const CVector& x) const;
  CVector demodulate(const CVector& r) const;

 private:
  AfdmParams params_;
  CMatrix a_;
  CMatrix a_h_;
};

}  // namespace afdm
