// detectors.hpp - ML and LMMSE detection with perfect or imperfect CSI

#pragma once

#include "afdm/constellation.hpp"
#include "afdm/link.hpp"
#include "afdm/types.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace afdm {

enum class CsiMode { Perfect, GaussianError };

struct CsiModel {
  CsiMode mode = CsiMode::Perfect;
  double sigma_h2 = 0.0;

  static CsiModel perfect() { return {}; }
  static CsiModel gaussian(double sigma_h2) { return {CsiMode::GaussianError, sigma_h2}; }
  /// sigma_h2 == 0 is treated as perfect.
  static CsiModel from_variance(double sigma_h2) { return sigma_h2 > 0.0 ? gaussian(sigma_h2) : perfect(); }

  bool is_perfect() const { return mode == CsiMode::Perfect || sigma_h2 == 0.0; }
  void validate() const;
};

// ---------------------------------------------------------------- CSI error

/// h + e_h, e_h ~ CN(0, sigma_h2 I). Perfect CSI returns h untouched and
/// consumes no randomness.
CVector inject_gain_error(const CVector& h, const CsiModel& csi, Rng& rng);

struct MatrixEstimate {
  CMatrix estimate;  ///< H_hat
  CMatrix error;     ///< H_tilde = H - H_hat
};

/// Perturbs the entries of H selected by `support` with CN(0, sigma_h2).
MatrixEstimate inject_matrix_error(const CMatrix& H, const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& support,
                                   const CsiModel& csi, Rng& rng);

/// Receiver view of a link: the same realized hardware state with path gains
/// h + e_h.
ImpairedLink estimated_link(const ImpairedLink& link, const CsiModel& csi, Rng& rng);

// ----------------------------------------------------------------------- ML

struct MlDecision {
  std::uint64_t hypothesis = 0;  ///< lexicographic index, symbol 0 most significant
  std::vector<int> labels;
  CVector symbols;
  std::vector<std::uint8_t> bits;
};

/// Exhaustive search over A^{NM} of ||y - (H x + M conj(x) + v_DI)||^2 using
/// the model held by `receiver`. Ties go to the lowest hypothesis index.
class MlDetector {
 public:
  static constexpr std::uint64_t kDefaultCap = std::uint64_t{1} << 20;

  /// Throws std::invalid_argument when |A|^{NM} exceeds `cap`.
  MlDetector(const ImpairedLink& receiver, const Constellation& constellation, std::uint64_t cap = kDefaultCap);

  MlDecision detect(const CVector& y) const;
  std::uint64_t hypotheses() const { return count_; }

 private:
  std::vector<int> labels_of(std::uint64_t index) const;

  Constellation constellation_;
  Index nm_ = 0;
  std::uint64_t count_ = 0;
  CMatrix h_;
  CMatrix mirror_;
  CVector v_di_;
  RMatrix models_;  // count x 2NJ, [Re | Im] of each model row, filled when small enough
  RVector model_norms_;
};

/// Search-space size |A|^{NM}, saturating at UINT64_MAX.
std::uint64_t ml_search_space(int order, Index nm);

MlDecision ml_detect(const CVector& y, const ImpairedLink& receiver, const Constellation& constellation,
                     std::uint64_t cap = MlDetector::kDefaultCap);

// -------------------------------------------------------------------- LMMSE

struct EqualizerReport {
  CMatrix G;       ///< H_hat^H W^{-1}
  CMatrix T;       ///< G H_hat
  RVector sinr;    ///< T(c,c) / (1 - T(c,c))
  CVector x_soft;  ///< G y
  std::vector<int> labels;
  bool regularized = false;  ///< jitter was needed to factor W
};

/// W = H_hat H_hat^H + error_gram + R_v, then G, T and the per-symbol SINR.
/// `y` may be empty, in which case only the filter is computed.
EqualizerReport lmmse_equalize(const CVector& y, const CMatrix& H_hat, const CMatrix& error_gram, const CMatrix& Rv,
                               const Constellation* constellation = nullptr);

/// Same with H_tilde H_tilde^H replaced by its expectation over the error
/// entries placed on `support`.
EqualizerReport lmmse_detect(const CVector& y, const CMatrix& H_hat,
                             const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& support, double sigma_h2,
                             const CMatrix& Rv, const Constellation& constellation);

/// sigma_h2 diag(number of supported entries per row).
CMatrix expected_error_gram(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& support, double sigma_h2);

/// Per-symbol SINR from the explicit signal / interference / noise split
///   |g_c h_c|^2 / (sum_{c' != c} |g_c h_c'|^2 + g_c (W - H_hat H_hat^H) g_c^H).
RVector lmmse_sinr_ratio_form(const CMatrix& G, const CMatrix& H_hat, const CMatrix& W);

// ----------------------------------------------------------- R_v estimation

/// Uncentred second moment of v = v_MI + v_DI + v_NI + w_bar over frames with
/// x uniform on A^{NM}.
CMatrix estimate_rv_covariance(const ImpairedLink& link, const Constellation& constellation, int n_frames, Rng& rng);

/// Closed form of the same moment for zero-mean unit-energy symbols:
///   M M^H + v_DI v_DI^H + (K^2 eta + sigma_q^2) C C^H + sigma^2 I.
CMatrix expected_rv_covariance(const ImpairedLink& link);

}  // namespace afdm
