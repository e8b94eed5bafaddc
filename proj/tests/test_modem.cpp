#include "afdm/constellation.hpp"
#include "afdm/modem.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace afdm;
using afdm::testing::max_abs_diff;

namespace {

// s(n) = N^{-1/2} sum_m x(m) exp(i 2 pi (c1 n^2 + c2 m^2 + n m / N))
CVector kernel_modulate(const CVector& x, int N, double c1, double c2) {
  CVector s = CVector::Zero(N);
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < N; ++m) {
      const double ph = kTwoPi * (c1 * n * n + c2 * m * m + static_cast<double>(n * m) / N);
      s(n) += x(m) * std::polar(1.0 / std::sqrt(static_cast<double>(N)), ph);
    }
  return s;
}

AfdmParams raw(int N, double c1, double c2, int cpp = 0) {
  AfdmParams p;
  p.N = N;
  p.c1 = c1;
  p.c2 = c2;
  p.cpp_len = cpp;
  return p;
}

}  // namespace

TEST_CASE("daft matrix is unitary") {
  for (int N : {2, 8, 16, 64}) {
    for (double c1 : {0.0, select_c1(1, 0, N), 0.37}) {
      const CMatrix A = build_daft_matrix<double>(N, c1, default_c2(N));
      CHECK(max_abs_diff(A * A.adjoint(), CMatrix::Identity(N, N)) < 1e-12);
    }
  }
}

TEST_CASE("zero chirp parameters give the unitary dft") {
  for (int N : {2, 8, 64}) {
    const CMatrix A = build_daft_matrix<double>(N, 0.0, 0.0);
    const CMatrix F = dft_matrix<double>(N);
    CHECK(max_abs_diff(A, F) == 0.0);
    // DFT entry (n, k) = exp(-i 2 pi n k / N) / sqrt(N)
    CHECK(std::abs(F(1, 1) - std::polar(1.0 / std::sqrt(N), -kTwoPi / N)) < 1e-15);
  }
}

TEST_CASE("N = 1 daft is [1]") {
  const CMatrix A = build_daft_matrix<double>(1, 0.3, 0.1);
  REQUIRE(A.rows() == 1);
  CHECK(std::abs(A(0, 0) - cd(1.0, 0.0)) < 1e-15);
}

TEST_CASE("modulation matches the kernel double sum") {
  Rng rng(3);
  for (int N : {4, 8, 16, 32}) {
    const AfdmParams p = raw(N, select_c1(1, 1, N), default_c2(N));
    const CVector x = complex_normal_vector(rng, N, 1.0);
    CHECK(max_abs_diff(modulate(x, p), kernel_modulate(x, N, p.c1, p.c2)) < 1e-10);
    CHECK(max_abs_diff(demodulate(modulate(x, p), p), x) < 1e-12);
  }
}

TEST_CASE("hand-evaluated N = 4 chirp, c1 = 1/4") {
  const AfdmParams p = raw(4, 0.25, 0.0);
  CVector e1 = CVector::Zero(4);
  e1(1) = 1.0;
  CVector want(4);
  want << 0.5, -0.5, -0.5, 0.5;
  CHECK(max_abs_diff(modulate(e1, p), want) < 1e-14);
}

TEST_CASE("ofdm modulation is the inverse dft") {
  Rng rng(5);
  const int N = 8;
  const AfdmParams p = raw(N, 0.0, 0.0);
  const CVector x = complex_normal_vector(rng, N, 1.0);
  CVector idft = CVector::Zero(N);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < N; ++k) idft(n) += x(k) * std::polar(1.0 / std::sqrt(8.0), kTwoPi * n * k / N);
  CHECK(max_abs_diff(modulate(x, p), idft) < 1e-14);
}

TEST_CASE("modulate rejects a length mismatch") {
  const AfdmParams p = raw(8, 0.0, 0.0);
  CHECK_THROWS_AS(modulate(CVector::Zero(7), p), std::invalid_argument);
  CHECK_THROWS_AS(demodulate(CVector::Zero(9), p), std::invalid_argument);
}

TEST_CASE("c1 selection rule") {
  CHECK(select_c1(1, 0, 8) == 3.0 / 16.0);
  CHECK(select_c1(0, 0, 2) == 0.25);
  CHECK(select_c1(1, 2, 16) == 7.0 / 32.0);
}

TEST_CASE("geometry validation") {
  CHECK(satisfies_dimension_constraint(1, 0, 1, 8));
  CHECK_FALSE(satisfies_dimension_constraint(1, 0, 2, 8));
  CHECK_FALSE(satisfies_dimension_constraint(1, 1, 1, 8));
  CHECK_THROWS_AS(AfdmParams::afdm(8, 1, 1, 2), std::invalid_argument);
  AfdmParams p = AfdmParams::afdm(16, 1, 1, 1);
  CHECK(p.cpp_len == 1);
  p.cpp_len = 17;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  const AfdmParams o = AfdmParams::ofdm(16, 1, 1, 1);
  CHECK(o.c1 == 0.0);
  CHECK(o.c2 == 0.0);
}

TEST_CASE("chirp-periodic prefix") {
  Rng rng(7);
  const int N = 8;
  const CVector s = complex_normal_vector(rng, N, 1.0);

  SUBCASE("zero c1 is a cyclic prefix") {
    const CVector out = add_cpp(s, raw(N, 0.0, 0.0, 3));
    REQUIRE(out.size() == 11);
    CHECK(max_abs_diff(out.head(3), s.tail(3)) == 0.0);
    CHECK(max_abs_diff(out.tail(N), s) == 0.0);
  }
  SUBCASE("empty prefix") { CHECK(max_abs_diff(add_cpp(s, raw(N, 0.2, 0.0, 0)), s) == 0.0); }
  SUBCASE("phase law at n = -1") {
    const double c1 = select_c1(1, 0, N);
    const CVector out = add_cpp(s, raw(N, c1, 0.0, 2));
    CHECK(std::abs(out(1) - s(7) * std::polar(1.0, -kTwoPi * c1 * (64.0 - 16.0))) < 1e-13);
    for (int n = -2; n < 0; ++n)
      CHECK(std::abs(out(n + 2) - out(N + n + 2) * std::polar(1.0, -kTwoPi * c1 * (N * N + 2.0 * N * n))) < 1e-13);
  }
  SUBCASE("round trip and slicing") {
    const AfdmParams p = raw(N, 0.3, 0.0, 2);
    CHECK(max_abs_diff(remove_cpp(add_cpp(s, p), p), s) == 0.0);
    CVector r(10);
    for (int i = 0; i < 10; ++i) r(i) = double(i);
    const CVector t = remove_cpp(r, p);
    REQUIRE(t.size() == 8);
    CHECK(t(0) == cd(2.0));
    CHECK(t(7) == cd(9.0));
    CHECK_THROWS_AS(remove_cpp(CVector::Zero(1), p), std::invalid_argument);
  }
  SUBCASE("prefix longer than N") { CHECK_THROWS_AS(add_cpp(s, raw(N, 0.0, 0.0, 9)), std::invalid_argument); }
}

TEST_CASE("modem caches the same transform") {
  Rng rng(11);
  const AfdmParams p = AfdmParams::afdm(16, 1, 1, 1);
  const Modem modem(p);
  const CVector x = complex_normal_vector(rng, 16, 1.0);
  CHECK(max_abs_diff(modem.modulate(x), modulate(x, p)) < 1e-14);
  CHECK(max_abs_diff(modem.demodulate(modem.modulate(x)), x) < 1e-12);
}

TEST_CASE("gray constellations") {
  const auto qpsk = Constellation::qpsk();
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(qpsk.point(0) - cd(r, r)) < 1e-15);
  CHECK(std::abs(qpsk.point(1) - cd(r, -r)) < 1e-15);
  CHECK(std::abs(qpsk.point(2) - cd(-r, r)) < 1e-15);
  CHECK(std::abs(qpsk.point(3) - cd(-r, -r)) < 1e-15);
  const auto bpsk = Constellation::bpsk();
  CHECK(bpsk.point(0) == cd(1.0));
  CHECK(bpsk.point(1) == cd(-1.0));

  for (int order : {2, 4, 16, 64}) {
    const Constellation c(order);
    double energy = 0.0;
    for (const cd& s : c.points()) energy += std::norm(s);
    CHECK(energy / order == doctest::Approx(1.0).epsilon(1e-12));
    // neighbours along each axis differ in one bit
    for (int a = 0; a < order; ++a) {
      double best = 1e9;
      for (int b = 0; b < order; ++b)
        if (b != a) best = std::min(best, std::abs(c.point(a) - c.point(b)));
      for (int b = 0; b < order; ++b)
        if (b != a && std::abs(std::abs(c.point(a) - c.point(b)) - best) < 1e-9)
          CHECK(std::popcount(static_cast<unsigned>(a ^ b)) == 1);
    }
  }

  Rng rng(2);
  const Constellation c16(16);
  std::vector<std::uint8_t> bits(64);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
  const CVector syms = c16.map_bits(bits);
  CHECK(syms.size() == 16);
  CHECK(c16.demap(syms) == bits);
  CHECK_THROWS_AS(c16.map_bits(std::vector<std::uint8_t>(3)), std::invalid_argument);
  CHECK_THROWS_AS(Constellation(6), std::invalid_argument);
  CHECK_THROWS_AS(Constellation(8), std::invalid_argument);
}
