// hwi.hpp - transceiver hardware impairment models
//
// Multiplicative: Wiener phase noise (common or separate oscillators) and
// receive CFO, both as unit-modulus diagonals. Additive: DAC quantization
// (AQNM), transmit IQ imbalance, soft-envelope-limiter PA and DC offset, the
// nonlinear ones through their Bussgang statistical surrogates.

#pragma once

#include "afdm/modem.hpp"
#include "afdm/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace afdm {

enum class LoMode { Common, Separate };

struct IqiParams {
  cd rho1{1.0, 0.0};
  cd rho2{0.0, 0.0};
};

struct PaParams {
  double gain = 1.0;            ///< K_PA
  double distortion_var = 0.0;  ///< sigma_q^2
};

/// All impairment knobs. Every block is off by default.
struct HwiConfig {
  bool pn_enabled = false;
  double psi_t = 0.0;  ///< transmit oscillator constant (s)
  double psi_r = 0.0;  ///< receive oscillator constant (s)
  LoMode lo_mode = LoMode::Common;

  bool cfo_enabled = false;
  double cfo = 0.0;  ///< normalized CFO factor

  bool dac_enabled = false;
  int dac_bits = 0;

  bool iqi_enabled = false;
  double iqi_lambda = 0.0;
  double iqi_beta = 0.0;  ///< radians

  bool pa_enabled = false;
  double clip_level = 0.0;  ///< nu_clip, linear amplitude ratio
  double symbol_power = 1.0;

  bool dco_enabled = false;
  cd dco{0.0, 0.0};

  void validate() const;

  bool is_ideal() const {
    return !pn_enabled && !cfo_enabled && !dac_enabled && !iqi_enabled && !pa_enabled && !dco_enabled;
  }

  /// Derived scalars; each reduces to its ideal value when the block is off.
  double eta() const;
  IqiParams iqi() const;
  PaParams pa() const;
  cd dc_offset() const { return dco_enabled ? dco : cd{}; }

  static HwiConfig ideal() { return {}; }
  /// |d_T| = 0.02, b = 5, CFO 0.04, beta = 1 deg, lambda = 0.02, nu_clip = 4 dB.
  static HwiConfig scheme1();
  /// |d_T| = 0.04, b = 5, CFO 0.04, beta = 1 deg, lambda = 0.05, nu_clip = 4 dB.
  static HwiConfig scheme2();
  /// Drops the multiplicative blocks (PN, CFO).
  HwiConfig additive_only() const;
  /// Keeps only PN and CFO.
  HwiConfig multiplicative_only() const;
};

/// Looks up "ideal", "scheme1" or "scheme2".
std::optional<HwiConfig> hwi_preset(const std::string& name);

/// Per-sample increment variance 4 pi^2 f_c^2 psi T_s.
double pn_increment_variance(double psi, const AfdmParams& params);

/// Per-antenna phase sequences theta(0..N-1).
struct PnTrajectory {
  std::vector<RVector> phases;
};

/// theta(0) ~ U[0, 2 pi) per independent oscillator; increments N(0, var).
/// Common mode gives every antenna the same sequence.
PnTrajectory sample_pn_trajectory(double increment_var, int N, int antennas, LoMode mode, Rng& rng);

/// Stacked diagonal exp(i theta) of a trajectory (length N * antennas).
CVector pn_diagonal(const PnTrajectory& trajectory);

struct PnMatrices {
  CVector transmit;  ///< diag of Phi_T, length N M
  CVector receive;   ///< diag of Phi_R, length N J
};

/// Transmit and receive PN diagonals. Identity when PN is disabled.
PnMatrices pn_matrices(const HwiConfig& config, const AfdmParams& params, int M, int J, Rng& rng);

/// diag(exp(i 2 pi phi n / N)) repeated for each of the J receive blocks.
CVector cfo_matrix(double phi_cfo, int N, int J);

/// Table value for b <= 5, sqrt(3) pi 2^(-2b-1) above.
double dac_scaling_factor(int bits);

/// sqrt(1 - eta) s + n, n ~ CN(0, eta I).
CVector dac_quantize(const CVector& s, double eta, Rng& rng);

/// rho1 = cos(beta) + i lambda sin(beta), rho2 = lambda cos(beta) - i sin(beta).
IqiParams iqi_params(double lambda, double beta);
CVector iqi_apply(const CVector& s, const IqiParams& iqi);

/// Bussgang gain and distortion variance of the soft-envelope limiter driven
/// by CN(0, P_s).
PaParams sel_pa_params(double clip_level, double symbol_power);
/// K s + q, q ~ CN(0, sigma_q^2 I).
CVector sel_pa_apply(const CVector& s, const PaParams& pa, Rng& rng);
/// Deterministic envelope clipper at amplitude A_is (diagnostic path).
CVector sel_clip(const CVector& s, double saturation_amplitude);

CVector dco_apply(const CVector& s, cd offset);

/// nu_clip from a level in dB (amplitude ratio, 20 log10).
inline double clip_level_from_db(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace afdm
