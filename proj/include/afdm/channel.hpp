// channel.hpp - doubly-selective channel realizations and their TD/DAFT matrices

#pragma once

#include "afdm/modem.hpp"
#include "afdm/types.hpp"

#include <span>
#include <vector>

namespace afdm {

/// One propagation path: gain h, integer delay l, normalized Doppler k.
struct PathTap {
  cd gain{0.0, 0.0};
  int delay = 0;
  double doppler = 0.0;
};

enum class DopplerModel {
  JakesFractional,  ///< k = k_budget cos(theta), theta ~ U[0, pi]
  IntegerOnly,      ///< same draw rounded to the nearest integer
};

/// P taps for every (receive j, transmit m) pair.
struct ChannelRealization {
  AfdmParams params;
  int M = 1;
  int J = 1;
  int P = 1;
  std::vector<PathTap> taps;  ///< index ((j * M) + m) * P + p

  std::span<const PathTap> taps_for(int j, int m) const {
    return {taps.data() + static_cast<std::size_t>((j * M + m) * P), static_cast<std::size_t>(P)};
  }
  std::span<PathTap> taps_for(int j, int m) {
    return {taps.data() + static_cast<std::size_t>((j * M + m) * P), static_cast<std::size_t>(P)};
  }

  /// Stacked gain vector h in (j, m, p) order.
  CVector gains() const;
  ChannelRealization with_gains(const CVector& gains) const;
};

struct DaftChannel {
  CMatrix H;     ///< NJ x NM, DAFT domain
  CMatrix Hbar;  ///< NJ x NM, time domain
};

/// Draws gains CN(0, 1/P), l_1 = 0, l_p ~ U{1..l_max} for p > 1 and Dopplers
/// from the chosen model with real budget `max_doppler`. Gains, delays and
/// Dopplers are independent across antenna pairs.
ChannelRealization sample_channel(int M, int J, int P, const AfdmParams& params, double max_doppler,
                                  DopplerModel model, Rng& rng);

/// Gamma_p Delta_{k_p} Pi^{l_p} without the gain.
CMatrix build_path_matrix(const PathTap& tap, const AfdmParams& params);

/// sum_p h_p Gamma_p Delta_{k_p} Pi^{l_p}.
CMatrix build_td_block(std::span<const PathTap> taps, const AfdmParams& params);

/// Stacked time-domain matrix, block (j, m) from build_td_block.
CMatrix build_td_matrix(const ChannelRealization& channel);

DaftChannel build_daft_channel(const ChannelRealization& channel);
DaftChannel build_daft_channel(const ChannelRealization& channel, const CMatrix& daft);

/// Index indicator of one path, (2 N c1 l - k) mod N. The DAFT-domain entry of
/// the path peaks where n' = n + indicator (mod N).
double index_indicator(const PathTap& tap, const AfdmParams& params);

/// Closed-form DAFT-domain entry (n, n') of one SISO block from the
/// zeta_1 / zeta_2 kernel sums, independent of the matrix route.
cd elementwise_channel_entry(int n, int n_prime, std::span<const PathTap> taps, const AfdmParams& params);

/// Row-wise band of width 2 k_nu + 1 around each path's peak, unioned over
/// paths. Diagnostic view of the banded approximation; the matrices above
/// are always exact.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> band_mask(std::span<const PathTap> taps,
                                                              const AfdmParams& params);

/// NJ x NM stack of band_mask blocks.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support_mask(const ChannelRealization& channel);

/// Normalized maximum Doppler v f_c / (c delta_f), v in km/h.
double velocity_to_kmax(double v_kmh, double f_c, double delta_f);

/// Integer Doppler budget implied by a real one: the nearest integer
/// (fractional residue up to 1/2 is covered by k_nu).
int integer_doppler_budget(double max_doppler);

}  // namespace afdm
