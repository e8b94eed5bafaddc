#include "afdm/link.hpp"

#include <stdexcept>

namespace afdm {

namespace {

// (I_J (x) A) * X, blockwise over row blocks of height N.
CMatrix apply_daft_rows(const CMatrix& daft, const CMatrix& X) {
  const Index N = daft.rows();
  CMatrix out(X.rows(), X.cols());
  for (Index j = 0; j < X.rows() / N; ++j) out.middleRows(j * N, N).noalias() = daft * X.middleRows(j * N, N);
  return out;
}

// X * (I_M (x) B), blockwise over column blocks of width N.
CMatrix apply_right_blocks(const CMatrix& X, const CMatrix& B) {
  const Index N = B.rows();
  CMatrix out(X.rows(), X.cols());
  for (Index m = 0; m < X.cols() / N; ++m) out.middleCols(m * N, N).noalias() = X.middleCols(m * N, N) * B;
  return out;
}

}  // namespace

MultiplicativeState sample_multiplicative(const HwiConfig& hwi, const AfdmParams& params, int M, int J,
                                          Rng& rng) {
  MultiplicativeState s;
  PnMatrices pn = pn_matrices(hwi, params, M, J, rng);
  s.phi_t = std::move(pn.transmit);
  s.phi_r = std::move(pn.receive);
  s.cfo = hwi.cfo_enabled ? cfo_matrix(hwi.cfo, params.N, J) : CVector::Ones(params.N * J);
  return s;
}

ImpairedLink realize_link(const ChannelRealization& channel, const HwiConfig& hwi, double sigma2, Rng& rng) {
  MultiplicativeState mult = sample_multiplicative(hwi, channel.params, channel.M, channel.J, rng);
  return realize_link(channel, hwi, sigma2, mult, build_daft_matrix<double>(channel.params));
}

ImpairedLink realize_link(const ChannelRealization& channel, const HwiConfig& hwi, double sigma2,
                          const MultiplicativeState& mult, const CMatrix& daft) {
  hwi.validate();
  const int N = channel.params.N;
  if (sigma2 < 0.0) throw std::invalid_argument("realize_link: negative noise variance");
  if (daft.rows() != N || daft.cols() != N) throw std::invalid_argument("realize_link: DAFT size mismatch");
  if (mult.phi_t.size() != N * channel.M || mult.phi_r.size() != N * channel.J || mult.cfo.size() != N * channel.J)
    throw std::invalid_argument("realize_link: multiplicative state has the wrong dimensions");
  if (channel.taps.size() != static_cast<std::size_t>(channel.M * channel.J * channel.P))
    throw std::invalid_argument("realize_link: channel tap count mismatch");

  ImpairedLink link;
  link.channel = channel;
  link.hwi = hwi;
  link.noise_var = sigma2;
  link.daft = daft;
  link.mult = mult;
  link.theta = build_td_matrix(channel);
  link.iqi = hwi.iqi();
  link.pa = hwi.pa();
  link.eta = hwi.eta();
  link.dco = hwi.dc_offset();

  const CVector rx_diag = mult.cfo.cwiseProduct(mult.phi_r);
  link.receive_op = apply_daft_rows(daft, rx_diag.asDiagonal() * link.theta);

  const double scale = link.linear_scale();
  const CMatrix daft_h = daft.adjoint();
  const CMatrix daft_t = daft.transpose();
  link.h_eff = (link.iqi.rho1 * scale) * apply_right_blocks(link.receive_op * mult.phi_t.asDiagonal(), daft_h);
  link.mirror_op =
      (link.iqi.rho2 * scale) * apply_right_blocks(link.receive_op * mult.phi_t.conjugate().asDiagonal(), daft_t);
  link.v_di = (link.pa.gain * link.dco) * link.receive_op.rowwise().sum();
  return link;
}

ImpairedLink with_gains(const ImpairedLink& link, const CVector& gains) {
  return realize_link(link.channel.with_gains(gains), link.hwi, link.noise_var, link.mult, link.daft);
}

FrameTranscript transmit_frame(const ImpairedLink& link, const CVector& x, Rng& rng) {
  const int N = link.N();
  const Index NM = static_cast<Index>(N) * link.M();
  const Index NJ = static_cast<Index>(N) * link.J();
  if (x.size() != NM) throw std::invalid_argument("transmit_frame: x must have length N M");

  const CVector dac_noise = link.eta > 0.0 ? complex_normal_vector(rng, NM, link.eta) : CVector::Zero(NM);
  const CVector pa_noise =
      link.pa.distortion_var > 0.0 ? complex_normal_vector(rng, NM, link.pa.distortion_var) : CVector::Zero(NM);
  const CVector awgn = link.noise_var > 0.0 ? complex_normal_vector(rng, NJ, link.noise_var) : CVector::Zero(NJ);

  FrameTranscript t;
  t.x = x;
  t.desired = link.h_eff * x;
  t.mirror = link.mirror_op * x.conjugate();
  t.dc = link.v_di;
  t.distortion = link.receive_op * (link.pa.gain * link.mult.phi_t.cwiseProduct(dac_noise) + pa_noise);
  {
    const CVector rotated = link.mult.cfo.cwiseProduct(link.mult.phi_r).cwiseProduct(awgn);
    t.noise.resize(NJ);
    for (int j = 0; j < link.J(); ++j) t.noise.segment(j * N, N).noalias() = link.daft * rotated.segment(j * N, N);
  }
  t.y = t.desired + t.mirror + t.dc + t.distortion + t.noise;

  // Transmit-side view of the same draw.
  CVector s(NM);
  const CMatrix daft_h = link.daft.adjoint();
  for (int m = 0; m < link.M(); ++m) s.segment(m * N, N).noalias() = daft_h * x.segment(m * N, N);
  const CVector s_t = link.mult.phi_t.cwiseProduct(std::sqrt(1.0 - link.eta) * s + dac_noise);
  t.tx.linear = (link.pa.gain * link.iqi.rho1) * s_t;
  t.tx.mirror = (link.pa.gain * link.iqi.rho2) * s_t.conjugate();
  t.tx.dc = CVector::Constant(NM, link.pa.gain * link.dco);
  t.tx.pa_noise = pa_noise;
  return t;
}

CVector receive_frame(const ImpairedLink& link, const CVector& x, Rng& rng) {
  const int N = link.N();
  const Index NM = static_cast<Index>(N) * link.M();
  const Index NJ = static_cast<Index>(N) * link.J();
  if (x.size() != NM) throw std::invalid_argument("receive_frame: x must have length N M");
  CVector y = link.h_eff * x + link.v_di;
  if (link.iqi.rho2 != cd(0.0)) y.noalias() += link.mirror_op * x.conjugate();
  if (link.eta > 0.0 || link.pa.distortion_var > 0.0) {
    CVector tx_noise = CVector::Zero(NM);
    if (link.eta > 0.0)
      tx_noise = link.pa.gain * link.mult.phi_t.cwiseProduct(complex_normal_vector(rng, NM, link.eta));
    if (link.pa.distortion_var > 0.0) tx_noise += complex_normal_vector(rng, NM, link.pa.distortion_var);
    y.noalias() += link.receive_op * tx_noise;
  }
  if (link.noise_var > 0.0) {
    const CVector rotated =
        link.mult.cfo.cwiseProduct(link.mult.phi_r).cwiseProduct(complex_normal_vector(rng, NJ, link.noise_var));
    for (int j = 0; j < link.J(); ++j) y.segment(j * N, N).noalias() += link.daft * rotated.segment(j * N, N);
  }
  return y;
}

CMatrix noise_covariance(const ImpairedLink& link) {
  const Index NJ = static_cast<Index>(link.N()) * link.J();
  return link.noise_var * CMatrix::Identity(NJ, NJ);
}

}  // namespace afdm
