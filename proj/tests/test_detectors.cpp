#include "afdm/detectors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <bit>

using namespace afdm;
using afdm::testing::max_abs_diff;

namespace {

using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

std::vector<int> random_labels(Rng& rng, Index n, int order) {
  std::vector<int> l(static_cast<std::size_t>(n));
  for (auto& v : l) v = static_cast<int>(rng() % static_cast<unsigned>(order));
  return l;
}

int bit_errors(const std::vector<int>& a, const std::vector<int>& b) {
  int e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
  return e;
}

ImpairedLink unit_link(int N, double sigma2) {
  ChannelRealization ch;
  ch.params = AfdmParams::afdm(N, 0, 0, 0);
  ch.taps = {PathTap{cd(1.0), 0, 0.0}};
  Rng rng(0);
  return realize_link(ch, HwiConfig::ideal(), sigma2, rng);
}

ImpairedLink fig10_link(Rng& rng, const HwiConfig& hwi, double sigma2) {
  const AfdmParams p = AfdmParams::afdm(8, 0, 1, 1);
  return realize_link(sample_channel(1, 2, 2, p, 0.1334, DopplerModel::JakesFractional, rng), hwi, sigma2, rng);
}

}  // namespace

TEST_CASE("csi error injection") {
  Rng rng(1);
  const CVector h = complex_normal_vector(rng, 100000, 1.0);
  CHECK(max_abs_diff(inject_gain_error(h, CsiModel::perfect(), rng), h) == 0.0);
  const CVector e = inject_gain_error(h, CsiModel::gaussian(0.02), rng) - h;
  CHECK(e.squaredNorm() / e.size() == doctest::Approx(0.02).epsilon(0.03));
  CHECK(std::abs(e.mean()) < 0.003);
  CHECK_THROWS_AS(CsiModel::gaussian(1.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS((CsiModel{CsiMode::Perfect, 0.1}).validate(), std::invalid_argument);
  CHECK(CsiModel::from_variance(0.0).is_perfect());

  const CMatrix H = afdm::testing::random_matrix(rng, 6, 4);
  Mask support = Mask::Constant(6, 4, false);
  support(0, 0) = support(3, 2) = support(5, 3) = true;
  const MatrixEstimate est = inject_matrix_error(H, support, CsiModel::gaussian(0.1), rng);
  CHECK(max_abs_diff(est.estimate + est.error, H) < 1e-15);
  for (Index r = 0; r < 6; ++r)
    for (Index c = 0; c < 4; ++c) CHECK((est.error(r, c) != cd(0.0)) == support(r, c));
  CHECK(max_abs_diff(inject_matrix_error(H, support, CsiModel::perfect(), rng).estimate, H) == 0.0);
  CHECK_THROWS_AS(inject_matrix_error(H, Mask::Constant(2, 2, true), CsiModel::perfect(), rng), std::invalid_argument);
}

TEST_CASE("estimated link shares the hardware state") {
  Rng rng(2);
  HwiConfig h = HwiConfig::scheme1();
  h.pn_enabled = true;
  h.psi_t = h.psi_r = 1e-17;
  const ImpairedLink link = fig10_link(rng, h, 0.1);
  const ImpairedLink same = estimated_link(link, CsiModel::perfect(), rng);
  CHECK(max_abs_diff(same.h_eff, link.h_eff) == 0.0);
  const ImpairedLink est = estimated_link(link, CsiModel::gaussian(0.02), rng);
  CHECK(max_abs_diff(est.mult.phi_t, link.mult.phi_t) == 0.0);
  CHECK(max_abs_diff(est.h_eff, link.h_eff) > 0.0);
}

TEST_CASE("ml hand oracle: two bpsk symbols through an identity channel") {
  const ImpairedLink link = unit_link(2, 1.0);
  REQUIRE(max_abs_diff(link.h_eff, CMatrix::Identity(2, 2)) < 1e-12);
  const Constellation bpsk = Constellation::bpsk();
  const MlDetector det(link, bpsk);
  CHECK(det.hypotheses() == 4);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const CVector y = complex_normal_vector(rng, 2, 1.0);
    // hypothesis index: symbol 0 most significant
    int best = 0;
    double best_metric = 1e300;
    for (int hyp = 0; hyp < 4; ++hyp) {
      CVector x(2);
      x << ((hyp >> 1) ? -1.0 : 1.0), ((hyp & 1) ? -1.0 : 1.0);
      const double m = (y - x).squaredNorm();
      if (m < best_metric) {
        best_metric = m;
        best = hyp;
      }
    }
    const MlDecision d = det.detect(y);
    CHECK(d.hypothesis == static_cast<std::uint64_t>(best));
    CHECK(d.labels[0] == (y(0).real() < 0.0 ? 1 : 0));
    CHECK(d.labels[1] == (y(1).real() < 0.0 ? 1 : 0));
    CHECK(d.bits.size() == 2);
  }
  // all metrics tie at the origin
  CHECK(det.detect(CVector::Zero(2)).hypothesis == 0);
  CVector half(2);
  half << 0.0, -1.0;
  CHECK(det.detect(half).hypothesis == 1);
}

TEST_CASE("ml recovers noiseless frames and enforces the cap") {
  Rng rng(4);
  const ImpairedLink link = fig10_link(rng, HwiConfig::scheme2(), 0.0);
  const Constellation bpsk = Constellation::bpsk();
  const MlDetector det(link, bpsk);
  CHECK(det.hypotheses() == 256);
  for (int f = 0; f < 50; ++f) {
    const auto labels = random_labels(rng, 8, 2);
    CHECK(det.detect(link.h_eff * bpsk.symbols_from_labels(labels) + link.mirror_op *
                                                                        bpsk.symbols_from_labels(labels).conjugate() +
                     link.v_di)
              .labels == labels);
  }
  CHECK_THROWS_AS(MlDetector(link, bpsk, 255), std::invalid_argument);
  CHECK(ml_search_space(4, 64) == std::numeric_limits<std::uint64_t>::max());
  CHECK(ml_search_space(2, 8) == 256);
  const CVector y = complex_normal_vector(rng, 16, 1.0);
  CHECK(ml_detect(y, link, bpsk).hypothesis == det.detect(y).hypothesis);
}

TEST_CASE("ml never loses to lmmse on the same frames") {
  Rng rng(5);
  const Constellation bpsk = Constellation::bpsk();
  const double s2 = db_to_linear(-4.0);
  long ml = 0, lin = 0;
  for (int r = 0; r < 500; ++r) {
    const ImpairedLink link = fig10_link(rng, HwiConfig::ideal(), s2);
    const MlDetector det(link, bpsk);
    const CMatrix Rv = expected_rv_covariance(link);
    const EqualizerReport filt = lmmse_equalize(CVector(), link.h_eff, CMatrix::Zero(16, 16), Rv);
    for (int f = 0; f < 20; ++f) {
      const auto labels = random_labels(rng, 8, 2);
      const CVector y = receive_frame(link, bpsk.symbols_from_labels(labels), rng);
      ml += bit_errors(labels, det.detect(y).labels);
      const EqualizerReport rep = lmmse_equalize(y, link.h_eff, CMatrix::Zero(16, 16), Rv, &bpsk);
      lin += bit_errors(labels, rep.labels);
      CHECK(max_abs_diff(rep.G, filt.G) < 1e-12);
    }
  }
  CHECK(ml > 0);
  CHECK(ml <= lin);
}

TEST_CASE("lmmse scalar wiener filter") {
  const CMatrix H = CMatrix::Identity(1, 1);
  const EqualizerReport r = lmmse_equalize(CVector::Constant(1, cd(2.0)), H, CMatrix::Zero(1, 1),
                                           CMatrix::Identity(1, 1));
  CHECK(r.T(0, 0).real() == doctest::Approx(0.5));
  CHECK(r.sinr(0) == doctest::Approx(1.0));
  CHECK(r.x_soft(0).real() == doctest::Approx(1.0));
  CHECK_FALSE(r.regularized);
  CHECK_THROWS_AS(lmmse_equalize(CVector(), H, CMatrix::Zero(2, 2), CMatrix::Identity(1, 1)), std::invalid_argument);
}

TEST_CASE("lmmse zero-forcing limit") {
  Rng rng(6);
  const CMatrix H = afdm::testing::random_matrix(rng, 8, 8);
  const EqualizerReport r = lmmse_equalize(CVector(), H, CMatrix::Zero(8, 8), 1e-14 * CMatrix::Identity(8, 8));
  CHECK(max_abs_diff(r.T, CMatrix::Identity(8, 8)) < 1e-6);
  CHECK(r.sinr.minCoeff() > 1e6);
  const EqualizerReport sing = lmmse_equalize(CVector(), CMatrix::Zero(4, 2), CMatrix::Zero(4, 4), CMatrix::Zero(4, 4));
  CHECK(sing.regularized);
}

TEST_CASE("sinr from T equals the explicit ratio form") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix H = afdm::testing::random_matrix(rng, 12, 8);
    const CMatrix E = 0.1 * afdm::testing::random_matrix(rng, 12, 12);
    const CMatrix gram = E * E.adjoint();
    const CMatrix Rv = 0.3 * CMatrix::Identity(12, 12) + 0.05 * (E + E.adjoint()) * (E + E.adjoint());
    const EqualizerReport r = lmmse_equalize(CVector(), H, gram, Rv);
    const CMatrix W = H * H.adjoint() + gram + Rv;
    const RVector ratio = lmmse_sinr_ratio_form(r.G, H, W);
    for (Index c = 0; c < 8; ++c) {
      CHECK(r.T(c, c).real() > 0.0);
      CHECK(r.T(c, c).real() < 1.0);
      CHECK(std::abs(ratio(c) - r.sinr(c)) < 1e-9 * std::max(1.0, r.sinr(c)));
    }
  }
}

TEST_CASE("soft-estimate second moment equals T") {
  Rng rng(8);
  const ImpairedLink link = fig10_link(rng, HwiConfig::scheme2(), db_to_linear(-8.0));
  const Constellation qpsk = Constellation::qpsk();
  const CMatrix Rv = expected_rv_covariance(link);
  const EqualizerReport filt = lmmse_equalize(CVector(), link.h_eff, CMatrix::Zero(16, 16), Rv);
  CMatrix acc = CMatrix::Zero(8, 8);
  const int frames = 10000;
  for (int f = 0; f < frames; ++f) {
    const auto labels = random_labels(rng, 8, 4);
    const CVector xs = filt.G * receive_frame(link, qpsk.symbols_from_labels(labels), rng);
    acc.noalias() += xs * xs.adjoint();
  }
  acc /= frames;
  CHECK(max_abs_diff(acc, filt.T) < 0.05 * afdm::testing::max_abs(filt.T));
}

TEST_CASE("interference covariance") {
  Rng rng(9);
  const Constellation qpsk = Constellation::qpsk();
  SUBCASE("ideal hardware converges to white noise") {
    const ImpairedLink link = fig10_link(rng, HwiConfig::ideal(), 0.2);
    const CMatrix R = estimate_rv_covariance(link, qpsk, 100000, rng);
    CHECK(max_abs_diff(R, 0.2 * CMatrix::Identity(16, 16)) < 0.03 * 0.2);
    CHECK(max_abs_diff(expected_rv_covariance(link), 0.2 * CMatrix::Identity(16, 16)) < 1e-15);
  }
  SUBCASE("dc offset adds a rank-one term") {
    HwiConfig h;
    h.dco_enabled = true;
    h.dco = cd(0.4, 0.0);
    const ImpairedLink link = fig10_link(rng, h, 0.1);
    const CMatrix R = estimate_rv_covariance(link, qpsk, 20000, rng);
    const CMatrix want = link.v_di * link.v_di.adjoint() + 0.1 * CMatrix::Identity(16, 16);
    CHECK(max_abs_diff(R, want) < 0.05 * afdm::testing::max_abs(want));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(R - 0.1 * CMatrix::Identity(16, 16));
    const RVector ev = es.eigenvalues();
    CHECK(ev(15) > 20.0 * std::abs(ev(14)));
  }
  SUBCASE("monte carlo matches the closed form under scheme 2") {
    const ImpairedLink link = fig10_link(rng, HwiConfig::scheme2(), 0.05);
    const CMatrix R = estimate_rv_covariance(link, qpsk, 50000, rng);
    const CMatrix E = expected_rv_covariance(link);
    CHECK(max_abs_diff(R, E) < 0.03 * afdm::testing::max_abs(E));
    CHECK(max_abs_diff(R, R.adjoint()) == 0.0);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(R);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
  }
  CHECK_THROWS_AS(estimate_rv_covariance(unit_link(2, 1.0), qpsk, 0, rng), std::invalid_argument);
}

TEST_CASE("expected error gram counts supported entries") {
  Mask m = Mask::Constant(3, 4, false);
  m(0, 1) = m(0, 2) = m(2, 3) = true;
  const CMatrix g = expected_error_gram(m, 0.5);
  CHECK(g(0, 0) == cd(1.0));
  CHECK(g(1, 1) == cd(0.0));
  CHECK(g(2, 2) == cd(0.5));
  CHECK(g(0, 2) == cd(0.0));

  Rng rng(10);
  const CMatrix H = afdm::testing::random_matrix(rng, 3, 4);
  CMatrix acc = CMatrix::Zero(3, 3);
  for (int i = 0; i < 20000; ++i) {
    const MatrixEstimate e = inject_matrix_error(H, m, CsiModel::gaussian(0.5), rng);
    acc += e.error * e.error.adjoint();
  }
  CHECK(max_abs_diff(acc / 20000.0, g) < 0.03);
}
