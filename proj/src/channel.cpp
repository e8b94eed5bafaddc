#include "afdm/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace afdm {

namespace {

constexpr long double kTwoPiL = 2.0L * std::numbers::pi_v<long double>;

// exp(i 2 pi x) with x reduced mod 1 in extended precision.
cd unit_phase(long double x) {
  const long double frac = x - std::floor(x);
  return std::polar(1.0, static_cast<double>(kTwoPiL * frac));
}

double positive_mod(double x, double n) {
  double r = std::fmod(x, n);
  if (r < 0.0) r += n;
  return r;
}

}  // namespace

CVector ChannelRealization::gains() const {
  CVector h(static_cast<Index>(taps.size()));
  for (std::size_t i = 0; i < taps.size(); ++i) h(static_cast<Index>(i)) = taps[i].gain;
  return h;
}

ChannelRealization ChannelRealization::with_gains(const CVector& gains) const {
  if (gains.size() != static_cast<Index>(taps.size()))
    throw std::invalid_argument("ChannelRealization::with_gains: length mismatch");
  ChannelRealization out = *this;
  for (std::size_t i = 0; i < taps.size(); ++i) out.taps[i].gain = gains(static_cast<Index>(i));
  return out;
}

ChannelRealization sample_channel(int M, int J, int P, const AfdmParams& params, double max_doppler,
                                  DopplerModel model, Rng& rng) {
  params.validate();
  if (M < 1 || J < 1 || P < 1) throw std::invalid_argument("sample_channel: M, J, P must be positive");
  if (P > 1 && params.l_max == 0)
    throw std::invalid_argument("sample_channel: P > 1 needs l_max >= 1 for the non-first delays");
  if (max_doppler < 0.0) throw std::invalid_argument("sample_channel: negative Doppler budget");
  if (max_doppler > params.k_max + 0.5 + 1e-12)
    throw std::invalid_argument("sample_channel: Doppler budget exceeds k_max + 1/2");

  ChannelRealization ch;
  ch.params = params;
  ch.M = M;
  ch.J = J;
  ch.P = P;
  ch.taps.resize(static_cast<std::size_t>(M * J * P));

  std::uniform_int_distribution<int> delay_dist(1, std::max(1, params.l_max));
  std::uniform_real_distribution<double> angle_dist(0.0, kPi);
  for (auto& tap : ch.taps) {
    tap.gain = complex_normal(rng, 1.0 / P);
  }
  for (int j = 0; j < J; ++j) {
    for (int m = 0; m < M; ++m) {
      auto taps = ch.taps_for(j, m);
      for (int p = 0; p < P; ++p) {
        taps[static_cast<std::size_t>(p)].delay = p == 0 ? 0 : delay_dist(rng);
        double k = max_doppler * std::cos(angle_dist(rng));
        if (model == DopplerModel::IntegerOnly) k = std::round(k);
        taps[static_cast<std::size_t>(p)].doppler = k;
      }
    }
  }
  return ch;
}

CMatrix build_path_matrix(const PathTap& tap, const AfdmParams& params) {
  const int N = params.N;
  const int l = tap.delay;
  if (l < 0 || l >= N) throw std::invalid_argument("build_path_matrix: delay outside [0, N)");
  CMatrix B = CMatrix::Zero(N, N);
  for (int n = 0; n < N; ++n) {
    cd value = unit_phase(static_cast<long double>(tap.doppler) * n / N);
    if (n < l) {
      const long double arg = -static_cast<long double>(params.c1) *
                              (static_cast<long double>(N) * N - 2.0L * N * (l - n));
      value *= unit_phase(arg);
    }
    B(n, ((n - l) % N + N) % N) = value;
  }
  return B;
}

CMatrix build_td_block(std::span<const PathTap> taps, const AfdmParams& params) {
  CMatrix H = CMatrix::Zero(params.N, params.N);
  for (const auto& tap : taps) H += tap.gain * build_path_matrix(tap, params);
  return H;
}

CMatrix build_td_matrix(const ChannelRealization& channel) {
  const int N = channel.params.N;
  CMatrix Hbar(N * channel.J, N * channel.M);
  for (int j = 0; j < channel.J; ++j)
    for (int m = 0; m < channel.M; ++m)
      Hbar.block(j * N, m * N, N, N) = build_td_block(channel.taps_for(j, m), channel.params);
  return Hbar;
}

DaftChannel build_daft_channel(const ChannelRealization& channel) {
  return build_daft_channel(channel, build_daft_matrix<double>(channel.params));
}

DaftChannel build_daft_channel(const ChannelRealization& channel, const CMatrix& daft) {
  const int N = channel.params.N;
  DaftChannel out;
  out.Hbar = build_td_matrix(channel);
  out.H.resize(out.Hbar.rows(), out.Hbar.cols());
  const CMatrix daft_h = daft.adjoint();
  for (int j = 0; j < channel.J; ++j)
    for (int m = 0; m < channel.M; ++m)
      out.H.block(j * N, m * N, N, N).noalias() = daft * out.Hbar.block(j * N, m * N, N, N) * daft_h;
  return out;
}

double index_indicator(const PathTap& tap, const AfdmParams& params) {
  const double N = params.N;
  return positive_mod(2.0 * N * params.c1 * tap.delay - tap.doppler, N);
}

cd elementwise_channel_entry(int n, int n_prime, std::span<const PathTap> taps, const AfdmParams& params) {
  const int N = params.N;
  if (n < 0 || n >= N || n_prime < 0 || n_prime >= N)
    throw std::invalid_argument("elementwise_channel_entry: index outside [0, N)");
  const long double c1 = params.c1;
  const long double c2 = params.c2;
  cd sum{0.0, 0.0};
  for (const auto& tap : taps) {
    const long double l = tap.delay;
    // zeta_1: exp(i 2 pi / N [N c1 l^2 - n' l + N c2 (n'^2 - n^2)])
    const long double z1_arg = c1 * l * l - static_cast<long double>(n_prime) * l / N +
                               c2 * (static_cast<long double>(n_prime) * n_prime - static_cast<long double>(n) * n);
    const cd zeta1 = unit_phase(z1_arg);

    // zeta_2: geometric sum of exp(-i 2 pi d m / N), m = 0..N-1
    const double d = n - n_prime + index_indicator(tap, params);
    const double d_mod = positive_mod(d, N);
    cd zeta2;
    if (d_mod < 1e-12 || N - d_mod < 1e-12) {
      zeta2 = cd(N, 0.0);
    } else {
      const cd num = unit_phase(-static_cast<long double>(d)) - 1.0;
      const cd den = unit_phase(-static_cast<long double>(d) / N) - 1.0;
      zeta2 = num / den;
    }
    sum += tap.gain * zeta1 * zeta2;
  }
  return sum / static_cast<double>(N);
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> band_mask(std::span<const PathTap> taps,
                                                              const AfdmParams& params) {
  const int N = params.N;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(N, N, false);
  for (const auto& tap : taps) {
    const double ind = index_indicator(tap, params);
    for (int n = 0; n < N; ++n) {
      const int peak = static_cast<int>(std::lround(n + ind)) % N;
      for (int q = -params.k_nu; q <= params.k_nu; ++q) mask(n, ((peak + q) % N + N) % N) = true;
    }
  }
  return mask;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support_mask(const ChannelRealization& channel) {
  const int N = channel.params.N;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(N * channel.J, N * channel.M);
  for (int j = 0; j < channel.J; ++j)
    for (int m = 0; m < channel.M; ++m)
      mask.block(j * N, m * N, N, N) = band_mask(channel.taps_for(j, m), channel.params);
  return mask;
}

double velocity_to_kmax(double v_kmh, double f_c, double delta_f) {
  if (v_kmh < 0.0 || !(f_c > 0.0) || !(delta_f > 0.0))
    throw std::invalid_argument("velocity_to_kmax: arguments must be non-negative / positive");
  constexpr double kSpeedOfLight = 299'792'458.0;
  return (v_kmh / 3.6) * f_c / (kSpeedOfLight * delta_f);
}

int integer_doppler_budget(double max_doppler) { return static_cast<int>(std::lround(max_doppler)); }

}  // namespace afdm
