// analysis.hpp - codeword matrices, pairwise error probabilities, union bound,
// diversity probe and the LMMSE BER expressions

#pragma once

#include "afdm/channel.hpp"
#include "afdm/constellation.hpp"
#include "afdm/detectors.hpp"
#include "afdm/hwi.hpp"
#include "afdm/link.hpp"
#include "afdm/types.hpp"

#include <cstdint>
#include <vector>

namespace afdm {

/// Gain-free view of a realized link. With L = PMJ and h ordered (j, m, p),
///   Xi(x) h = H_eff x + M_op conj(x) + v_DI + v_NI(u)
/// where column (j, m, p) of Xi sits in row block j and equals
///   rho1 Y1 x_m + rho2 Y1~ conj(x_m) + K d_T Y2 1 + Y2 u_m,
///   Y2  = A P_j Phi_R,j B_{p,j,m}
///   Y1  = K sqrt(1 - eta) Y2 Phi_T,m A^H
///   Y1~ = K sqrt(1 - eta) Y2 conj(Phi_T,m) A^T.
class CodewordOperator {
 public:
  explicit CodewordOperator(const ImpairedLink& link);

  int N() const { return n_; }
  int M() const { return m_; }
  int J() const { return j_; }
  int P() const { return p_; }
  Index L() const { return static_cast<Index>(p_) * m_ * j_; }

  /// NJ x L codeword matrix for symbols x (length NM) and transmit
  /// distortion u = K Phi_T n + q (length NM, empty for zero).
  CMatrix matrix(const CVector& x, const CVector& u = CVector()) const;

  /// Xi(e) = rho1 Y1 e + rho2 Y1~ conj(e): the part that survives in
  /// Xi(x_c) - Xi(x_e) with e = x_c - x_e.
  CMatrix difference(const CVector& e) const;

  /// Omega = blockdiag_j(Xi_j(e)^H Xi_j(e)), L x L.
  CMatrix omega(const CVector& e) const;

 private:
  Index column(int j, int m, int p) const { return (static_cast<Index>(j) * m_ + m) * p_ + p; }

  int n_ = 0, m_ = 0, j_ = 0, p_ = 0;
  cd rho1_, rho2_, dc_;  // dc_ = K d_T
  std::vector<CMatrix> y1_, y1c_, y2_;  // indexed by column(j, m, p)
};

/// Channel covariance and noise levels of the PEP expressions.
struct PepContext {
  CMatrix gamma;  ///< L x L, Hermitian PSD
  double sigma2 = 1.0;
  double sigma_h2 = 0.0;

  /// Gamma = (1/P) I_L.
  static PepContext iid(int P, Index L, double sigma2, double sigma_h2 = 0.0);

  double gamma1() const { return 1.0 / (4.0 * sigma2); }
  double gamma2() const { return 1.0 / (3.0 * sigma2); }
  double kappa1() const { return 1.0 / (4.0 * (sigma_h2 + sigma2)); }
  double kappa2() const { return 1.0 / (3.0 * (sigma_h2 + sigma2)); }
};

/// Eigenvalues of Gamma^{1/2} Omega Gamma^{1/2} (those of Gamma Omega).
RVector pep_eigenvalues(const CMatrix& gamma, const CMatrix& omega);

/// 1/(12 prod(1 + a mu)) + 1/(4 prod(1 + b mu)).
double upep_from_eigenvalues(const RVector& mu, double a, double b);

/// Perfect-CSI UPEP from Omega.
double upep(const CMatrix& omega, const PepContext& ctx);
/// Imperfect-CSI UPEP: kappa1, kappa2 and Gamma + sigma_h2 I.
double upep_imperfect_csi(const CMatrix& omega, const PepContext& ctx);

double upep(const CVector& xc, const CVector& xe, const PepContext& ctx, const CodewordOperator& codewords);
double upep_imperfect_csi(const CVector& xc, const CVector& xe, const PepContext& ctx,
                          const CodewordOperator& codewords);

struct UnionBoundOptions {
  int max_enumerated_bits = 16;       ///< full double enumeration when L_b <= this
  std::uint64_t sampled_pairs = 20000;  ///< pair budget otherwise
};

struct UnionBoundResult {
  std::vector<double> ber;  ///< one per noise variance
  bool sampled = false;
  std::uint64_t pairs = 0;  ///< ordered pairs represented
};

/// (1 / (2^{L_b} L_b)) sum_{c} sum_{e != c} D(b_e, b_c) P(x_c, x_e) for each
/// sigma^2 in `sigma2_grid`. Uses the imperfect-CSI UPEP when sigma_h2 > 0.
/// `rng` is only drawn from in sampled mode.
UnionBoundResult aber_union_bound(const CodewordOperator& codewords, const Constellation& constellation,
                                  const CMatrix& gamma, const std::vector<double>& sigma2_grid, double sigma_h2,
                                  const UnionBoundOptions& options, Rng& rng);

struct DiversityProbeConfig {
  AfdmParams params;
  int M = 1, J = 1, P = 1;
  double max_doppler = 0.0;
  DopplerModel doppler_model = DopplerModel::JakesFractional;
  HwiConfig hwi;
  int order = 2;
  int n_links = 8;
  double rank_tolerance = 1e-8;  ///< relative to the largest singular value
};

struct DiversityProbeResult {
  int min_rank_omega = 0;  ///< over all links and error vectors
  int gamma_rank = 0;      ///< r
  int diversity = 0;       ///< min rank of Gamma Omega
};

/// Numerical rank of Omega over random links and error vectors. Error vectors
/// differ from a random codeword in a random number of positions, one
/// position included.
DiversityProbeResult diversity_probe(const DiversityProbeConfig& config, int n_error_vectors, Rng& rng);

int numerical_rank(const CMatrix& X, double rel_tol);

/// u1 = (4 / log2|A|)(1 - 1/sqrt|A|), u2 = 3 / (|A| - 1); BPSK uses (1, 2).
struct LmmseBerCoefficients {
  double u1;
  double u2;
};
LmmseBerCoefficients lmmse_ber_coefficients(const Constellation& constellation);

/// (1/NM) sum_c u1 Q(sqrt(u2 chi_c)).
double lmmse_ber_approx(const RVector& sinr, const Constellation& constellation);
double lmmse_ber_approx(const EqualizerReport& report, const Constellation& constellation);

/// u1 Q(sqrt(u2 t / (1 - t))), t = tr(T) / NM.
double lmmse_ber_lower_bound(const EqualizerReport& report, const Constellation& constellation);

double q_function(double x);
/// (1/12) e^{-x^2/2} + (1/4) e^{-2x^2/3}.
double q_approx(double x);

}  // namespace afdm
