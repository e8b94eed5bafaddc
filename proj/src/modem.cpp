#include "afdm/modem.hpp"

#include <string>

namespace afdm {

void AfdmParams::validate() const {
  if (N < 2) throw std::invalid_argument("AfdmParams: N must be at least 2");
  if (k_max < 0 || k_nu < 0 || l_max < 0)
    throw std::invalid_argument("AfdmParams: k_max, k_nu and l_max must be non-negative");
  if (cpp_len < l_max)
    throw std::invalid_argument("AfdmParams: prefix shorter than l_max (" + std::to_string(cpp_len) +
                                " < " + std::to_string(l_max) + ")");
  if (cpp_len > N) throw std::invalid_argument("AfdmParams: prefix longer than N");
  if (!(delta_f > 0.0) || !(f_c > 0.0))
    throw std::invalid_argument("AfdmParams: delta_f and f_c must be positive");
  if (!satisfies_dimension_constraint(k_max, k_nu, l_max, N))
    throw std::invalid_argument("AfdmParams: 2(k_max + k_nu)(l_max + 1) + l_max must be below N");
}

AfdmParams AfdmParams::afdm(int N, int k_max, int k_nu, int l_max) {
  AfdmParams p;
  p.N = N;
  p.k_max = k_max;
  p.k_nu = k_nu;
  p.l_max = l_max;
  p.cpp_len = l_max;
  p.c1 = select_c1(k_max, k_nu, N);
  p.c2 = default_c2(N);
  p.validate();
  return p;
}

AfdmParams AfdmParams::ofdm(int N, int k_max, int k_nu, int l_max) {
  AfdmParams p = afdm(N, k_max, k_nu, l_max);
  p.c1 = 0.0;
  p.c2 = 0.0;
  return p;
}

bool satisfies_dimension_constraint(int k_max, int k_nu, int l_max, int N) {
  return 2L * (k_max + k_nu) * (l_max + 1) + l_max < N;
}

double select_c1(int k_max, int k_nu, int N) {
  return (2.0 * (k_max + k_nu) + 1.0) / (2.0 * N);
}

double default_c2(int N) { return 1.0 / (2.0 * N * N * kPi); }

CVector add_cpp(const CVector& s, const AfdmParams& params) {
  const int N = params.N;
  const int L = params.cpp_len;
  if (s.size() != N) throw std::invalid_argument("add_cpp: length mismatch");
  if (L < 0 || L > N) throw std::invalid_argument("add_cpp: prefix length must lie in [0, N]");
  CVector out(N + L);
  out.tail(N) = s;
  for (int n = -L; n < 0; ++n) {
    const long double arg = static_cast<long double>(params.c1) *
                            (static_cast<long double>(N) * N + 2.0L * N * n);
    const long double frac = arg - std::floor(arg);
    out(n + L) = s(N + n) * std::polar(1.0, static_cast<double>(-2.0L * std::numbers::pi_v<long double> * frac));
  }
  return out;
}

CVector remove_cpp(const CVector& r, const AfdmParams& params) {
  const int L = params.cpp_len;
  if (L < 0 || r.size() < L) throw std::invalid_argument("remove_cpp: input shorter than prefix");
  return r.tail(r.size() - L);
}

Modem::Modem(const AfdmParams& params)
    : params_(params), a_(build_daft_matrix<double>(params)), a_h_(a_.adjoint()) {}

CVector Modem::modulate(const CVector& x) const {
  if (x.size() != params_.N) throw std::invalid_argument("Modem::modulate: length mismatch");
  return a_h_ * x;
}

CVector Modem::demodulate(const CVector& r) const {
  if (r.size() != params_.N) throw std::invalid_argument("Modem::demodulate: length mismatch");
  return a_ * r;
}

}  // namespace afdm
