// config.hpp - sweep configuration and its INI-style file format

#pragma once

#include "afdm/analysis.hpp"
#include "afdm/channel.hpp"
#include "afdm/hwi.hpp"
#include "afdm/modem.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace afdm {

/// Raised for anything wrong with a configuration (the CLI maps it to exit 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Waveform { Afdm, Ofdm };
enum class DetectorKind { Ml, Lmmse };
enum class RvMode { Analytic, MonteCarlo };
enum class ErrorGramForm { Realization, Expectation };
/// Ber runs detection; Sinr only evaluates the LMMSE output SINR per realization.
enum class Metric { Ber, Sinr };

struct SweepConfig {
  std::string name = "custom";

  Waveform waveform = Waveform::Afdm;
  int N = 64;
  int M = 4;
  int J = 4;
  int P = 3;
  int order = 4;
  std::optional<int> l_max;  ///< default P - 1
  int k_nu = 1;
  double f_c = 4e9;
  double delta_f = 15e3;

  std::vector<double> snr_db;

  double velocity_kmh = 540.0;
  std::optional<double> max_doppler;  ///< explicit budget, overrides velocity
  DopplerModel doppler_model = DopplerModel::JakesFractional;

  DetectorKind detector = DetectorKind::Lmmse;
  double sigma_h2 = 0.0;
  ErrorGramForm error_form = ErrorGramForm::Realization;
  RvMode rv_mode = RvMode::Analytic;
  int rv_frames = 20000;
  std::uint64_t ml_cap = std::uint64_t{1} << 20;

  std::string hwi_preset = "ideal";
  HwiConfig hwi;

  std::uint64_t max_frames = 200000;
  std::uint64_t min_bit_errors = 200;
  int frames_per_realization = 1;
  int batch_size = 32;  ///< trials per deterministic reduction step

  Metric metric = Metric::Ber;
  bool theory = true;
  int theory_realizations = 20;  ///< link realizations averaged by the union bound
  UnionBoundOptions union_options;

  std::uint64_t seed = 1;

  /// Real Doppler budget: max_doppler or the velocity mapping.
  double doppler_budget() const;
  int effective_l_max() const { return l_max.value_or(P - 1); }
  /// Waveform geometry (integer k_max from the rounded budget).
  AfdmParams params() const;
  int bits_per_frame() const;

  /// Throws ConfigError.
  void validate() const;
};

/// Parses the INI-style file. Unknown sections or keys are errors.
SweepConfig load_config(const std::string& path);
SweepConfig parse_config(const std::string& text);

/// Linear grid start, start + step, ... up to stop (inclusive within 1e-9).
std::vector<double> snr_grid(double start, double stop, double step);

std::string to_string(Waveform w);
std::string to_string(DetectorKind d);
std::string to_string(RvMode r);
std::string to_string(ErrorGramForm f);
std::string to_string(Metric m);
std::string to_string(DopplerModel d);
std::string to_string(LoMode m);

}  // namespace afdm
