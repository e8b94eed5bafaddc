#include "afdm/hwi.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace afdm {

namespace {

constexpr std::array<double, 5> kDacTable = {0.3634, 0.1175, 0.03454, 0.009497, 0.002499};

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace

void HwiConfig::validate() const {
  if (pn_enabled && (psi_t < 0.0 || psi_r < 0.0))
    throw std::invalid_argument("HwiConfig: oscillator constants must be non-negative");
  if (dac_enabled && dac_bits < 1) throw std::invalid_argument("HwiConfig: DAC needs at least one bit");
  if (iqi_enabled) {
    if (iqi_lambda < 0.0 || iqi_lambda > 1.0) throw std::invalid_argument("HwiConfig: IQI lambda outside [0, 1]");
    if (iqi_beta < 0.0 || iqi_beta > kPi / 2.0) throw std::invalid_argument("HwiConfig: IQI beta outside [0, pi/2]");
  }
  if (pa_enabled && (clip_level < 0.0 || !(symbol_power > 0.0)))
    throw std::invalid_argument("HwiConfig: PA needs clip level >= 0 and symbol power > 0");
}

double HwiConfig::eta() const { return dac_enabled ? dac_scaling_factor(dac_bits) : 0.0; }

IqiParams HwiConfig::iqi() const { return iqi_enabled ? iqi_params(iqi_lambda, iqi_beta) : IqiParams{}; }

PaParams HwiConfig::pa() const { return pa_enabled ? sel_pa_params(clip_level, symbol_power) : PaParams{}; }

HwiConfig HwiConfig::scheme1() {
  HwiConfig c;
  c.dco_enabled = true;
  c.dco = {0.02, 0.0};
  c.dac_enabled = true;
  c.dac_bits = 5;
  c.cfo_enabled = true;
  c.cfo = 0.04;
  c.iqi_enabled = true;
  c.iqi_beta = deg_to_rad(1.0);
  c.iqi_lambda = 0.02;
  c.pa_enabled = true;
  c.clip_level = clip_level_from_db(4.0);
  return c;
}

HwiConfig HwiConfig::scheme2() {
  HwiConfig c = scheme1();
  c.dco = {0.04, 0.0};
  c.iqi_lambda = 0.05;
  return c;
}

HwiConfig HwiConfig::additive_only() const {
  HwiConfig c = *this;
  c.pn_enabled = false;
  c.cfo_enabled = false;
  return c;
}

HwiConfig HwiConfig::multiplicative_only() const {
  HwiConfig c;
  c.pn_enabled = pn_enabled;
  c.psi_t = psi_t;
  c.psi_r = psi_r;
  c.lo_mode = lo_mode;
  c.cfo_enabled = cfo_enabled;
  c.cfo = cfo;
  return c;
}

std::optional<HwiConfig> hwi_preset(const std::string& name) {
  if (name == "ideal") return HwiConfig::ideal();
  if (name == "scheme1" || name == "scheme-1") return HwiConfig::scheme1();
  if (name == "scheme2" || name == "scheme-2") return HwiConfig::scheme2();
  return std::nullopt;
}

double pn_increment_variance(double psi, const AfdmParams& params) {
  return 4.0 * kPi * kPi * params.f_c * params.f_c * psi * params.sample_period();
}

PnTrajectory sample_pn_trajectory(double increment_var, int N, int antennas, LoMode mode, Rng& rng) {
  if (increment_var < 0.0) throw std::invalid_argument("sample_pn_trajectory: negative variance");
  std::uniform_real_distribution<double> initial(0.0, kTwoPi);
  std::normal_distribution<double> step(0.0, std::sqrt(increment_var));

  auto draw = [&]() {
    RVector theta(N);
    theta(0) = initial(rng);
    for (int n = 1; n < N; ++n) theta(n) = theta(n - 1) + step(rng);
    return theta;
  };

  PnTrajectory out;
  out.phases.reserve(static_cast<std::size_t>(antennas));
  if (mode == LoMode::Common) {
    const RVector shared = draw();
    for (int a = 0; a < antennas; ++a) out.phases.push_back(shared);
  } else {
    for (int a = 0; a < antennas; ++a) out.phases.push_back(draw());
  }
  return out;
}

CVector pn_diagonal(const PnTrajectory& trajectory) {
  if (trajectory.phases.empty()) return {};
  const Index N = trajectory.phases.front().size();
  CVector d(N * static_cast<Index>(trajectory.phases.size()));
  for (std::size_t a = 0; a < trajectory.phases.size(); ++a)
    for (Index n = 0; n < N; ++n)
      d(static_cast<Index>(a) * N + n) = std::polar(1.0, trajectory.phases[a](n));
  return d;
}

PnMatrices pn_matrices(const HwiConfig& config, const AfdmParams& params, int M, int J, Rng& rng) {
  const int N = params.N;
  if (!config.pn_enabled) return {CVector::Ones(N * M), CVector::Ones(N * J)};
  PnMatrices out;
  out.transmit = pn_diagonal(
      sample_pn_trajectory(pn_increment_variance(config.psi_t, params), N, M, config.lo_mode, rng));
  out.receive = pn_diagonal(
      sample_pn_trajectory(pn_increment_variance(config.psi_r, params), N, J, config.lo_mode, rng));
  return out;
}

CVector cfo_matrix(double phi_cfo, int N, int J) {
  CVector d(N * J);
  for (int n = 0; n < N; ++n) {
    const long double x = static_cast<long double>(phi_cfo) * n / N;
    const long double frac = x - std::floor(x);
    const cd v = std::polar(1.0, static_cast<double>(2.0L * std::numbers::pi_v<long double> * frac));
    for (int j = 0; j < J; ++j) d(j * N + n) = v;
  }
  return d;
}

double dac_scaling_factor(int bits) {
  if (bits < 1) throw std::invalid_argument("dac_scaling_factor: bits must be >= 1");
  if (bits <= 5) return kDacTable[static_cast<std::size_t>(bits - 1)];
  return std::sqrt(3.0) * kPi * std::pow(2.0, -2.0 * bits - 1.0);
}

CVector dac_quantize(const CVector& s, double eta, Rng& rng) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("dac_quantize: eta outside [0, 1]");
  if (eta == 0.0) return s;
  return std::sqrt(1.0 - eta) * s + complex_normal_vector(rng, s.size(), eta);
}

IqiParams iqi_params(double lambda, double beta) {
  return {cd(std::cos(beta), lambda * std::sin(beta)), cd(lambda * std::cos(beta), -std::sin(beta))};
}

CVector iqi_apply(const CVector& s, const IqiParams& iqi) { return iqi.rho1 * s + iqi.rho2 * s.conjugate(); }

PaParams sel_pa_params(double clip_level, double symbol_power) {
  if (clip_level < 0.0 || !(symbol_power > 0.0))
    throw std::invalid_argument("sel_pa_params: need clip level >= 0 and symbol power > 0");
  if (std::isinf(clip_level)) return {1.0, 0.0};
  const double nu2 = clip_level * clip_level;
  const double k = 1.0 - std::exp(-nu2) + 0.5 * std::sqrt(kPi) * clip_level * std::erfc(clip_level);
  const double var = symbol_power * (1.0 - std::exp(-nu2) - k * k);
  return {k, std::max(var, 0.0)};
}

CVector sel_pa_apply(const CVector& s, const PaParams& pa, Rng& rng) {
  if (pa.distortion_var == 0.0) return pa.gain * s;
  return pa.gain * s + complex_normal_vector(rng, s.size(), pa.distortion_var);
}

CVector sel_clip(const CVector& s, double saturation_amplitude) {
  CVector out = s;
  for (Index i = 0; i < out.size(); ++i) {
    const double r = std::abs(out(i));
    if (r > saturation_amplitude) out(i) *= saturation_amplitude / r;
  }
  return out;
}

CVector dco_apply(const CVector& s, cd offset) { return s + CVector::Constant(s.size(), offset); }

}  // namespace afdm
