// link.hpp - end-to-end impaired MIMO-AFDM input-output relationship
//
//   y = H_eff x + M_op conj(x) + v_DI + v_NI + w_bar
//
// with C = (I_J (x) A) P Phi_R Theta the receive operator acting on stacked
// time-domain transmit samples:
//   H_eff = rho1 K sqrt(1 - eta) C Phi_T (I_M (x) A^H)
//   M_op  = rho2 K sqrt(1 - eta) C conj(Phi_T) (I_M (x) A^T)
//   v_DI  = K d_T C 1
//   v_NI  = C (K Phi_T n + q)
//   w_bar = (I_J (x) A) P Phi_R w,  w ~ CN(0, sigma^2 I)
// M_op carries A^T because the IQ mirror conjugates the time-domain signal:
// conj(A^H x) = A^T conj(x).

#pragma once

#include "afdm/channel.hpp"
#include "afdm/hwi.hpp"
#include "afdm/types.hpp"

namespace afdm {

/// Realized multiplicative distortions, all unit-modulus diagonals.
struct MultiplicativeState {
  CVector phi_t;  ///< length N M
  CVector phi_r;  ///< length N J
  CVector cfo;    ///< length N J
};

MultiplicativeState sample_multiplicative(const HwiConfig& hwi, const AfdmParams& params, int M, int J,
                                          Rng& rng);

struct ImpairedLink {
  ChannelRealization channel;
  HwiConfig hwi;
  double noise_var = 0.0;

  CMatrix daft;  ///< A
  MultiplicativeState mult;
  CMatrix theta;  ///< time-domain channel, NJ x NM

  IqiParams iqi;
  PaParams pa;
  double eta = 0.0;
  cd dco{0.0, 0.0};

  CMatrix receive_op;  ///< C
  CMatrix h_eff;
  CMatrix mirror_op;
  CVector v_di;

  int N() const { return channel.params.N; }
  int M() const { return channel.M; }
  int J() const { return channel.J; }
  /// sqrt(1 - eta) K_PA.
  double linear_scale() const { return std::sqrt(1.0 - eta) * pa.gain; }
};

/// Draws the multiplicative state from `rng` and assembles the link.
ImpairedLink realize_link(const ChannelRealization& channel, const HwiConfig& hwi, double sigma2, Rng& rng);

/// Assembles a link from an already realized multiplicative state and DAFT
/// matrix (used to rebuild the same link with different path gains).
ImpairedLink realize_link(const ChannelRealization& channel, const HwiConfig& hwi, double sigma2,
                          const MultiplicativeState& mult, const CMatrix& daft);

/// Same link with the path gains replaced.
ImpairedLink with_gains(const ImpairedLink& link, const CVector& gains);

/// Per-transmit-antenna components of the impaired time-domain signal
///   s_check = K (rho1 s_T + rho2 conj(s_T) + d_T 1) + q,  s_T = Phi_T Q(s).
struct TransmitTerms {
  CVector linear;  ///< K rho1 s_T
  CVector mirror;  ///< K rho2 conj(s_T)
  CVector dc;      ///< K d_T 1
  CVector pa_noise;  ///< q
};

struct FrameTranscript {
  CVector x;
  CVector y;
  CVector desired;
  CVector mirror;
  CVector dc;
  CVector distortion;  ///< v_NI
  CVector noise;       ///< w_bar
  TransmitTerms tx;
};

/// One frame through the link. DAC and PA noise and the AWGN are drawn per
/// frame; y is the sum of the five terms.
FrameTranscript transmit_frame(const ImpairedLink& link, const CVector& x, Rng& rng);

/// Same draws as transmit_frame, returning only the received vector.
CVector receive_frame(const ImpairedLink& link, const CVector& x, Rng& rng);

/// sigma^2 I_{NJ}.
CMatrix noise_covariance(const ImpairedLink& link);

}  // namespace afdm
