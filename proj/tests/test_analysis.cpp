#include "afdm/analysis.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace afdm;
using afdm::testing::max_abs_diff;

namespace {

HwiConfig impaired() {
  HwiConfig h = HwiConfig::scheme2();
  h.pn_enabled = true;
  h.psi_t = 1e-17;
  h.psi_r = 1e-17;
  h.lo_mode = LoMode::Separate;
  return h;
}

// Single LTI path, N samples, no impairments: Xi(e) = e.
ImpairedLink flat_link(int N, double sigma2 = 0.1) {
  ChannelRealization ch;
  ch.params = N == 1 ? AfdmParams{} : AfdmParams::afdm(N, 0, 0, 0);
  ch.params.N = N;
  ch.taps = {PathTap{cd(1.0), 0, 0.0}};
  MultiplicativeState mult{CVector::Ones(N), CVector::Ones(N), CVector::Ones(N)};
  return realize_link(ch, HwiConfig::ideal(), sigma2, mult, build_daft_matrix<double>(N, ch.params.c1, ch.params.c2));
}

CVector bpsk_vector(Rng& rng, Index n) {
  CVector x(n);
  for (Index i = 0; i < n; ++i) x(i) = (rng() & 1U) ? -1.0 : 1.0;
  return x;
}

}  // namespace

TEST_CASE("codeword operator reproduces the link") {
  Rng rng(1);
  const AfdmParams p = AfdmParams::afdm(16, 1, 1, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const ChannelRealization ch = sample_channel(2, 2, 2, p, 1.2, DopplerModel::JakesFractional, rng);
    const ImpairedLink link = realize_link(ch, impaired(), 0.0, rng);
    const CodewordOperator cw(link);
    CHECK(cw.L() == 8);
    const CVector x = complex_normal_vector(rng, 32, 1.0);
    const CVector u = complex_normal_vector(rng, 32, 0.01);
    const CVector h = ch.gains();
    const CVector want = link.h_eff * x + link.mirror_op * x.conjugate() + link.v_di + link.receive_op * u;
    CHECK(max_abs_diff(cw.matrix(x, u) * h, want) < 1e-10);
    CHECK(max_abs_diff(cw.matrix(x) * h, want - link.receive_op * u) < 1e-10);

    const CVector xe = complex_normal_vector(rng, 32, 1.0);
    CHECK(max_abs_diff(cw.matrix(x, u) - cw.matrix(xe, u), cw.difference(x - xe)) < 1e-12);
    // the transmit-side distortion enters through the same u for both codewords
    const CMatrix om = cw.omega(x - xe);
    CHECK(std::abs((h.adjoint() * om * h)(0, 0).real() - (cw.difference(x - xe) * h).squaredNorm()) < 1e-10);
    CHECK(max_abs_diff(om, om.adjoint()) < 1e-12);
  }
}

TEST_CASE("codeword of a unit vector through an identity path") {
  const ImpairedLink link = flat_link(4);
  const CodewordOperator cw(link);
  CVector e0 = CVector::Zero(4);
  e0(0) = 1.0;
  const CMatrix xi = cw.matrix(e0);
  REQUIRE(xi.cols() == 1);
  CHECK(max_abs_diff(xi, e0) < 1e-12);
  CHECK(max_abs_diff(cw.matrix(2.0 * e0), 2.0 * xi) < 1e-12);
  CHECK_THROWS_AS(cw.matrix(CVector::Zero(3)), std::invalid_argument);
}

TEST_CASE("upep limits and monotonicity") {
  Rng rng(2);
  const AfdmParams p = AfdmParams::afdm(8, 0, 1, 1);
  const ImpairedLink link =
      realize_link(sample_channel(1, 2, 2, p, 0.13, DopplerModel::JakesFractional, rng), impaired(), 0.1, rng);
  const CodewordOperator cw(link);
  const CVector xc = bpsk_vector(rng, 8);
  CVector xe = xc;
  xe(3) = -xe(3);
  const CMatrix om = cw.omega(xc - xe);

  CHECK(upep(om, PepContext::iid(2, 4, 1e12)) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  double prev = 1.0;
  for (double snr_db = -10.0; snr_db <= 40.0; snr_db += 2.0) {
    const PepContext ctx = PepContext::iid(2, 4, db_to_linear(-snr_db));
    const double v = upep(om, ctx);
    CHECK(v > 0.0);
    CHECK(v <= 1.0 / 3.0);
    CHECK(v < prev);
    prev = v;
    CHECK(upep_imperfect_csi(om, ctx) == doctest::Approx(v).epsilon(1e-14));
    CHECK(upep(xc, xe, ctx, cw) == doctest::Approx(v).epsilon(1e-12));
    const PepContext worse = PepContext::iid(2, 4, ctx.sigma2, 0.02);
    const PepContext worst = PepContext::iid(2, 4, ctx.sigma2, 0.04);
    // the error variance inflates Gamma as well, so it only hurts once sigma^2 < 1/P
    if (ctx.sigma2 < 0.5) {
      CHECK(upep_imperfect_csi(om, worse) > v);
      CHECK(upep_imperfect_csi(om, worst) > upep_imperfect_csi(om, worse));
    }
    CHECK(upep_imperfect_csi(xc, xe, worse, cw) == doctest::Approx(upep_imperfect_csi(om, worse)).epsilon(1e-12));
  }
}

TEST_CASE("upep eigenvalue route") {
  Rng rng(3);
  const CMatrix Z = afdm::testing::random_matrix(rng, 4, 4);
  const CMatrix gamma = Z * Z.adjoint();
  const CMatrix X = afdm::testing::random_matrix(rng, 6, 4);
  const CMatrix omega = X.adjoint() * X;
  const RVector mu = pep_eigenvalues(gamma, omega);
  // det(I + a Gamma Omega) = prod(1 + a mu)
  const double a = 0.3;
  const cd det = (CMatrix::Identity(4, 4) + a * gamma * omega).determinant();
  double prod = 1.0;
  for (Index i = 0; i < mu.size(); ++i) prod *= 1.0 + a * mu(i);
  CHECK(std::abs(det - cd(prod)) < 1e-9 * prod);
  CHECK(upep_from_eigenvalues(RVector::Zero(3), 1.0, 1.0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("upep against monte-carlo conditional pep") {
  // one Rayleigh path, BPSK sign flip: ||Xi(e) h||^2 = 4 |h|^2
  const ImpairedLink link = flat_link(4);
  const CodewordOperator cw(link);
  CVector xc = CVector::Ones(4);
  CVector xe = xc;
  xe(1) = -1.0;
  const double s2 = 0.1;
  Rng rng(4);
  const int draws = 100000;

  SUBCASE("perfect csi") {
    const PepContext ctx = PepContext::iid(1, 1, s2);
    const double closed = upep(xc, xe, ctx, cw);
    const double d = cw.difference(xc - xe).squaredNorm();
    CHECK(d == doctest::Approx(4.0));
    CHECK(closed == doctest::Approx(1.0 / (12.0 * (1.0 + ctx.gamma1() * d)) + 1.0 / (4.0 * (1.0 + ctx.gamma2() * d))));
    double mc = 0.0;
    for (int i = 0; i < draws; ++i) {
      const cd h = complex_normal(rng, 1.0);
      mc += q_function(std::sqrt(d * std::norm(h) / (2.0 * s2)));
    }
    mc /= draws;
    CHECK(std::abs(closed - mc) / mc < 0.10);
  }
  SUBCASE("imperfect csi") {
    const double sh2 = 0.02;
    const PepContext ctx = PepContext::iid(1, 1, s2, sh2);
    const double closed = upep_imperfect_csi(xc, xe, ctx, cw);
    double mc = 0.0;
    for (int i = 0; i < draws; ++i) {
      const cd h = complex_normal(rng, 1.0 + sh2);
      mc += q_function(std::sqrt(4.0 * std::norm(h) / (2.0 * sh2 + 2.0 * s2)));
    }
    mc /= draws;
    CHECK(std::abs(closed - mc) / mc < 0.10);
  }
}

TEST_CASE("union bound") {
  Rng rng(5);
  const Constellation bpsk = Constellation::bpsk();
  UnionBoundOptions opt;

  SUBCASE("one symbol: a single error event") {
    const ImpairedLink link = flat_link(1);
    const CodewordOperator cw(link);
    const CMatrix gamma = CMatrix::Identity(1, 1);
    const UnionBoundResult r = aber_union_bound(cw, bpsk, gamma, {0.1, 1.0}, 0.0, opt, rng);
    CVector xc(1), xe(1);
    xc << 1.0;
    xe << -1.0;
    CHECK(r.ber[0] == doctest::Approx(upep(xc, xe, PepContext::iid(1, 1, 0.1), cw)).epsilon(1e-12));
    CHECK(r.ber[1] == doctest::Approx(upep(xc, xe, PepContext::iid(1, 1, 1.0), cw)).epsilon(1e-12));
    CHECK_FALSE(r.sampled);
  }
  SUBCASE("hand enumeration on two symbols") {
    const ImpairedLink link = flat_link(2);
    const CodewordOperator cw(link);
    const PepContext ctx = PepContext::iid(1, 1, 0.3);
    double want = 0.0;
    for (int c = 0; c < 4; ++c)
      for (int e = 0; e < 4; ++e) {
        if (c == e) continue;
        CVector xc(2), xe(2);
        xc << ((c >> 1) ? -1.0 : 1.0), ((c & 1) ? -1.0 : 1.0);
        xe << ((e >> 1) ? -1.0 : 1.0), ((e & 1) ? -1.0 : 1.0);
        want += std::popcount(static_cast<unsigned>(c ^ e)) * upep(xc, xe, ctx, cw);
      }
    want /= 4.0 * 2.0;
    const UnionBoundResult r = aber_union_bound(cw, bpsk, ctx.gamma, {0.3}, 0.0, opt, rng);
    CHECK(r.ber[0] == doctest::Approx(want).epsilon(1e-12));
  }
  SUBCASE("estimation error raises the bound; sampling agrees with enumeration") {
    const AfdmParams p = AfdmParams::afdm(8, 0, 1, 1);
    const ImpairedLink link = realize_link(sample_channel(1, 2, 2, p, 0.13, DopplerModel::JakesFractional, rng),
                                           HwiConfig::scheme1(), 0.1, rng);
    const CodewordOperator cw(link);
    const CMatrix gamma = CMatrix::Identity(4, 4) / 2.0;
    const std::vector<double> grid{db_to_linear(-6.0), db_to_linear(-12.0), db_to_linear(-18.0)};
    const UnionBoundResult full = aber_union_bound(cw, bpsk, gamma, grid, 0.0, opt, rng);
    const UnionBoundResult e1 = aber_union_bound(cw, bpsk, gamma, grid, 0.01, opt, rng);
    const UnionBoundResult e2 = aber_union_bound(cw, bpsk, gamma, grid, 0.02, opt, rng);
    CHECK(full.pairs == 256 * 255);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(e1.ber[i] > full.ber[i]);
      CHECK(e2.ber[i] > e1.ber[i]);
      if (i > 0) CHECK(full.ber[i] < full.ber[i - 1]);
    }
    UnionBoundOptions sampled;
    sampled.max_enumerated_bits = 4;
    sampled.sampled_pairs = 40000;
    const UnionBoundResult s = aber_union_bound(cw, bpsk, gamma, grid, 0.0, sampled, rng);
    CHECK(s.sampled);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(s.ber[i] == doctest::Approx(full.ber[i]).epsilon(0.1));
  }
}

TEST_CASE("diversity probe") {
  Rng rng(6);
  DiversityProbeConfig cfg;
  cfg.params = AfdmParams::afdm(8, 0, 1, 1);
  cfg.P = 2;
  cfg.max_doppler = 0.13;
  cfg.n_links = 4;

  cfg.J = 1;
  const DiversityProbeResult siso = diversity_probe(cfg, 40, rng);
  CHECK(siso.min_rank_omega == 2);
  CHECK(siso.diversity == 2);

  cfg.J = 2;
  const DiversityProbeResult ideal = diversity_probe(cfg, 40, rng);
  CHECK(ideal.min_rank_omega == 4);
  CHECK(ideal.gamma_rank == 4);
  CHECK(ideal.diversity == 4);

  HwiConfig mult;
  mult.pn_enabled = true;
  mult.psi_t = mult.psi_r = 1e-17;
  mult.cfo_enabled = true;
  mult.cfo = 0.08;
  cfg.hwi = mult;
  const DiversityProbeResult hw = diversity_probe(cfg, 40, rng);
  CHECK(hw.min_rank_omega == ideal.min_rank_omega);
  CHECK(hw.diversity == ideal.diversity);

  CMatrix r2 = CMatrix::Zero(3, 3);
  r2(0, 0) = 1.0;
  r2(1, 1) = 1e-3;
  r2(2, 2) = 1e-12;
  CHECK(numerical_rank(r2, 1e-8) == 2);
}

TEST_CASE("lmmse ber expressions") {
  const auto q = lmmse_ber_coefficients(Constellation::qpsk());
  CHECK(q.u1 == doctest::Approx(1.0));
  CHECK(q.u2 == doctest::Approx(1.0));
  const auto b = lmmse_ber_coefficients(Constellation::bpsk());
  CHECK(b.u1 == 1.0);
  CHECK(b.u2 == 2.0);
  const auto s = lmmse_ber_coefficients(Constellation(16));
  CHECK(s.u1 == doctest::Approx(0.75));
  CHECK(s.u2 == doctest::Approx(0.2));

  const Constellation qpsk = Constellation::qpsk();
  CHECK(lmmse_ber_approx(RVector::Constant(4, 1e12), qpsk) < 1e-300);
  RVector chi(3);
  chi << 1.0, 4.0, 9.0;
  CHECK(lmmse_ber_approx(chi, qpsk) ==
        doctest::Approx((q_function(1.0) + q_function(2.0) + q_function(3.0)) / 3.0).epsilon(1e-14));

  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const CMatrix H = afdm::testing::random_matrix(rng, 8, 6);
    const EqualizerReport r = lmmse_equalize(CVector(), H, CMatrix::Zero(8, 8), 0.5 * CMatrix::Identity(8, 8));
    CHECK(lmmse_ber_lower_bound(r, qpsk) <= lmmse_ber_approx(r, qpsk) + 1e-15);
  }
  // uniform diagonal: equality
  const EqualizerReport u = lmmse_equalize(CVector(), CMatrix::Identity(4, 4), CMatrix::Zero(4, 4), CMatrix::Identity(4, 4));
  CHECK(lmmse_ber_lower_bound(u, qpsk) == doctest::Approx(lmmse_ber_approx(u, qpsk)).epsilon(1e-12));
  const EqualizerReport one =
      lmmse_equalize(CVector(), CMatrix::Constant(1, 1, cd(0.7, 0.2)), CMatrix::Zero(1, 1), CMatrix::Identity(1, 1));
  CHECK(lmmse_ber_lower_bound(one, qpsk) == doctest::Approx(lmmse_ber_approx(one, qpsk)).epsilon(1e-12));
}

TEST_CASE("q function and its exponential approximation") {
  CHECK(q_function(0.0) == 0.5);
  CHECK(q_approx(0.0) == doctest::Approx(1.0 / 3.0));
  CHECK(q_function(40.0) < 1e-300);
  CHECK(q_function(1.0) == doctest::Approx(0.158655253931457).epsilon(1e-12));
  // on [1, 5] the approximation overestimates by 6.6% to 26.2%
  double lo = 1.0, hi = 0.0;
  for (double x = 1.0; x <= 5.0 + 1e-12; x += 0.001) {
    const double r = (q_approx(x) - q_function(x)) / q_function(x);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(lo > 0.066);
  CHECK(hi < 0.263);
  CHECK(hi > 0.26);
}
