#include "afdm/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace afdm {

namespace pt = boost::property_tree;

double SweepConfig::doppler_budget() const {
  if (max_doppler) return *max_doppler;
  return velocity_to_kmax(velocity_kmh, f_c, delta_f);
}

AfdmParams SweepConfig::params() const {
  const int k_max = integer_doppler_budget(doppler_budget());
  AfdmParams p = waveform == Waveform::Afdm ? AfdmParams::afdm(N, k_max, k_nu, effective_l_max())
                                            : AfdmParams::ofdm(N, k_max, k_nu, effective_l_max());
  p.f_c = f_c;
  p.delta_f = delta_f;
  return p;
}

int SweepConfig::bits_per_frame() const { return N * M * Constellation(order).bits_per_symbol(); }

void SweepConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
  if (N < 2) fail("N must be at least 2");
  if (M < 1 || J < 1 || P < 1) fail("M, J and P must be positive");
  if (k_nu < 0) fail("k_nu must be non-negative");
  if (effective_l_max() < 0) fail("l_max must be non-negative");
  if (P > 1 && effective_l_max() < 1) fail("P > 1 needs l_max >= 1");
  if (!(f_c > 0.0) || !(delta_f > 0.0)) fail("f_c and delta_f must be positive");
  if (snr_db.empty()) fail("SNR grid is empty");
  for (double s : snr_db)
    if (!std::isfinite(s)) fail("SNR grid has a non-finite entry");
  if (velocity_kmh < 0.0) fail("velocity must be non-negative");
  if (max_doppler && *max_doppler < 0.0) fail("max_doppler must be non-negative");
  if (sigma_h2 < 0.0 || sigma_h2 > 1.0) fail("sigma_h2 outside [0, 1]");
  if (rv_frames < 1) fail("rv_frames must be positive");
  if (max_frames < 1) fail("max_frames must be positive");
  if (frames_per_realization < 1) fail("frames_per_realization must be positive");
  if (batch_size < 1) fail("batch_size must be positive");
  if (theory_realizations < 1) fail("theory_realizations must be positive");
  if (metric == Metric::Sinr && detector != DetectorKind::Lmmse) fail("metric = sinr needs the LMMSE detector");
  try {
    Constellation c(order);
    (void)c;
    params().validate();
    hwi.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  const double budget = doppler_budget();
  if (budget > integer_doppler_budget(budget) + 0.5 + 1e-12) fail("Doppler budget inconsistent");
  if (detector == DetectorKind::Ml && ml_search_space(order, static_cast<Index>(N) * M) > ml_cap)
    fail("ML search space |A|^(NM) exceeds the hypothesis cap");
}

std::vector<double> snr_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw ConfigError("config: SNR grid needs step > 0 and stop >= start");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = start + i * step;
    if (v > stop + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

std::string to_string(Waveform w) { return w == Waveform::Afdm ? "afdm" : "ofdm"; }
std::string to_string(DetectorKind d) { return d == DetectorKind::Ml ? "ml" : "lmmse"; }
std::string to_string(RvMode r) { return r == RvMode::Analytic ? "analytic" : "montecarlo"; }
std::string to_string(ErrorGramForm f) { return f == ErrorGramForm::Realization ? "realization" : "expectation"; }
std::string to_string(Metric m) { return m == Metric::Ber ? "ber" : "sinr"; }
std::string to_string(DopplerModel d) { return d == DopplerModel::JakesFractional ? "jakes" : "integer"; }
std::string to_string(LoMode m) { return m == LoMode::Common ? "common" : "separate"; }

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"system", {"name", "waveform", "N", "M", "J", "P", "modulation", "order", "l_max", "k_nu", "f_c", "delta_f"}},
      {"channel", {"velocity_kmh", "max_doppler", "doppler_model"}},
      {"snr", {"start", "stop", "step", "list"}},
      {"detector", {"type", "sigma_h2", "error_form", "rv", "rv_frames", "ml_cap"}},
      {"hwi",
       {"preset", "additive_only", "pn_psi", "pn_psi_t", "pn_psi_r", "lo_mode", "cfo", "dac_bits", "iqi_lambda",
        "iqi_beta_deg", "clip_db", "symbol_power", "dco", "dco_phase_deg"}},
      {"stopping", {"max_frames", "min_bit_errors", "frames_per_realization", "batch_size"}},
      {"run", {"seed", "metric", "theory", "theory_realizations", "union_max_bits", "union_pairs"}},
  };
  return keys;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> str(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  std::optional<double> real(const std::string& section, const std::string& key) const {
    const auto s = str(section, key);
    if (!s) return std::nullopt;
    try {
      std::size_t pos = 0;
      const double v = std::stod(*s, &pos);
      if (pos != s->size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: [" + section + "] " + key + " is not a number: '" + *s + "'");
    }
  }

  std::optional<long long> integer(const std::string& section, const std::string& key) const {
    const auto v = real(section, key);
    if (!v) return std::nullopt;
    if (std::floor(*v) != *v) throw ConfigError("config: [" + section + "] " + key + " must be an integer");
    return static_cast<long long>(*v);
  }

  std::optional<bool> boolean(const std::string& section, const std::string& key) const {
    const auto s = str(section, key);
    if (!s) return std::nullopt;
    const std::string v = lower(*s);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("config: [" + section + "] " + key + " is not a boolean: '" + *s + "'");
  }

 private:
  const pt::ptree& tree_;
};

void check_keys(const pt::ptree& tree) {
  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end()) throw ConfigError("config: unknown section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      (void)value;
      if (!it->second.count(key)) throw ConfigError("config: unknown key [" + section + "] " + key);
    }
  }
}

int modulation_order(const std::string& name) {
  const std::string v = lower(name);
  if (v == "bpsk") return 2;
  if (v == "qpsk" || v == "4qam" || v == "4-qam") return 4;
  if (v == "16qam" || v == "16-qam") return 16;
  if (v == "64qam" || v == "64-qam") return 64;
  throw ConfigError("config: unknown modulation '" + name + "'");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument("trailing");
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("config: bad SNR list entry '" + item + "'");
    }
  }
  return out;
}

void apply_hwi(const Reader& r, SweepConfig& c) {
  if (const auto preset = r.str("hwi", "preset")) {
    const auto hwi = hwi_preset(lower(*preset));
    if (!hwi) throw ConfigError("config: unknown HWI preset '" + *preset + "'");
    c.hwi = *hwi;
    c.hwi_preset = lower(*preset);
  }
  HwiConfig& h = c.hwi;
  const auto psi = r.real("hwi", "pn_psi");
  const auto psi_t = r.real("hwi", "pn_psi_t");
  const auto psi_r = r.real("hwi", "pn_psi_r");
  if (psi || psi_t || psi_r) {
    h.psi_t = psi_t.value_or(psi.value_or(0.0));
    h.psi_r = psi_r.value_or(psi.value_or(0.0));
    h.pn_enabled = h.psi_t > 0.0 || h.psi_r > 0.0;
  }
  if (const auto mode = r.str("hwi", "lo_mode")) {
    const std::string m = lower(*mode);
    if (m == "common" || m == "clo") h.lo_mode = LoMode::Common;
    else if (m == "separate" || m == "slo") h.lo_mode = LoMode::Separate;
    else throw ConfigError("config: unknown lo_mode '" + *mode + "'");
  }
  if (const auto cfo = r.real("hwi", "cfo")) {
    h.cfo = *cfo;
    h.cfo_enabled = *cfo != 0.0;
  }
  if (const auto bits = r.integer("hwi", "dac_bits")) {
    h.dac_bits = static_cast<int>(*bits);
    h.dac_enabled = *bits > 0;
  }
  const auto lambda = r.real("hwi", "iqi_lambda");
  const auto beta = r.real("hwi", "iqi_beta_deg");
  if (lambda || beta) {
    if (lambda) h.iqi_lambda = *lambda;
    if (beta) h.iqi_beta = *beta * kPi / 180.0;
    h.iqi_enabled = h.iqi_lambda != 0.0 || h.iqi_beta != 0.0;
  }
  if (const auto clip = r.str("hwi", "clip_db")) {
    const std::string v = lower(*clip);
    if (v == "off" || v == "inf" || v == "none") {
      h.pa_enabled = false;
    } else {
      h.clip_level = clip_level_from_db(*r.real("hwi", "clip_db"));
      h.pa_enabled = true;
    }
  }
  if (const auto ps = r.real("hwi", "symbol_power")) h.symbol_power = *ps;
  const auto dco = r.real("hwi", "dco");
  const auto phase = r.real("hwi", "dco_phase_deg");
  if (dco || phase) {
    const double mag = dco.value_or(std::abs(h.dco));
    h.dco = std::polar(mag, phase.value_or(0.0) * kPi / 180.0);
    h.dco_enabled = mag != 0.0;
  }
  if (r.boolean("hwi", "additive_only").value_or(false)) h = h.additive_only();
}

}  // namespace

SweepConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  check_keys(tree);
  const Reader r(tree);
  SweepConfig c;

  if (auto v = r.str("system", "name")) c.name = *v;
  if (auto v = r.str("system", "waveform")) {
    const std::string w = lower(*v);
    if (w == "afdm") c.waveform = Waveform::Afdm;
    else if (w == "ofdm") c.waveform = Waveform::Ofdm;
    else throw ConfigError("config: unknown waveform '" + *v + "'");
  }
  if (auto v = r.integer("system", "N")) c.N = static_cast<int>(*v);
  if (auto v = r.integer("system", "M")) c.M = static_cast<int>(*v);
  if (auto v = r.integer("system", "J")) c.J = static_cast<int>(*v);
  if (auto v = r.integer("system", "P")) c.P = static_cast<int>(*v);
  if (auto v = r.str("system", "modulation")) c.order = modulation_order(*v);
  if (auto v = r.integer("system", "order")) c.order = static_cast<int>(*v);
  if (auto v = r.integer("system", "l_max")) c.l_max = static_cast<int>(*v);
  if (auto v = r.integer("system", "k_nu")) c.k_nu = static_cast<int>(*v);
  if (auto v = r.real("system", "f_c")) c.f_c = *v;
  if (auto v = r.real("system", "delta_f")) c.delta_f = *v;

  if (auto v = r.real("channel", "velocity_kmh")) c.velocity_kmh = *v;
  if (auto v = r.real("channel", "max_doppler")) c.max_doppler = *v;
  if (auto v = r.str("channel", "doppler_model")) {
    const std::string m = lower(*v);
    if (m == "jakes" || m == "fractional") c.doppler_model = DopplerModel::JakesFractional;
    else if (m == "integer") c.doppler_model = DopplerModel::IntegerOnly;
    else throw ConfigError("config: unknown doppler_model '" + *v + "'");
  }

  if (auto v = r.str("snr", "list")) {
    if (r.str("snr", "start") || r.str("snr", "stop") || r.str("snr", "step"))
      throw ConfigError("config: give either [snr] list or start/stop/step");
    c.snr_db = parse_list(*v);
  } else {
    const auto start = r.real("snr", "start");
    const auto stop = r.real("snr", "stop");
    const auto step = r.real("snr", "step");
    if (start || stop || step) {
      if (!start) throw ConfigError("config: [snr] start missing");
      c.snr_db = snr_grid(*start, stop.value_or(*start), step.value_or(1.0));
    }
  }

  if (auto v = r.str("detector", "type")) {
    const std::string d = lower(*v);
    if (d == "ml") c.detector = DetectorKind::Ml;
    else if (d == "lmmse") c.detector = DetectorKind::Lmmse;
    else throw ConfigError("config: unknown detector '" + *v + "'");
  }
  if (auto v = r.real("detector", "sigma_h2")) c.sigma_h2 = *v;
  if (auto v = r.str("detector", "error_form")) {
    const std::string f = lower(*v);
    if (f == "realization") c.error_form = ErrorGramForm::Realization;
    else if (f == "expectation") c.error_form = ErrorGramForm::Expectation;
    else throw ConfigError("config: unknown error_form '" + *v + "'");
  }
  if (auto v = r.str("detector", "rv")) {
    const std::string m = lower(*v);
    if (m == "analytic") c.rv_mode = RvMode::Analytic;
    else if (m == "montecarlo" || m == "monte-carlo") c.rv_mode = RvMode::MonteCarlo;
    else throw ConfigError("config: unknown rv mode '" + *v + "'");
  }
  if (auto v = r.integer("detector", "rv_frames")) c.rv_frames = static_cast<int>(*v);
  if (auto v = r.integer("detector", "ml_cap")) {
    if (*v < 1) throw ConfigError("config: ml_cap must be positive");
    c.ml_cap = static_cast<std::uint64_t>(*v);
  }

  apply_hwi(r, c);

  auto non_negative = [](long long v, const char* what) {
    if (v < 0) throw ConfigError(std::string("config: ") + what + " must be non-negative");
    return static_cast<std::uint64_t>(v);
  };
  if (auto v = r.integer("stopping", "max_frames")) c.max_frames = non_negative(*v, "max_frames");
  if (auto v = r.integer("stopping", "min_bit_errors")) c.min_bit_errors = non_negative(*v, "min_bit_errors");
  if (auto v = r.integer("stopping", "frames_per_realization")) c.frames_per_realization = static_cast<int>(*v);
  if (auto v = r.integer("stopping", "batch_size")) c.batch_size = static_cast<int>(*v);

  if (auto v = r.integer("run", "seed")) c.seed = non_negative(*v, "seed");
  if (auto v = r.str("run", "metric")) {
    const std::string m = lower(*v);
    if (m == "ber") c.metric = Metric::Ber;
    else if (m == "sinr") c.metric = Metric::Sinr;
    else throw ConfigError("config: unknown metric '" + *v + "'");
  }
  if (auto v = r.boolean("run", "theory")) c.theory = *v;
  if (auto v = r.integer("run", "theory_realizations")) c.theory_realizations = static_cast<int>(*v);
  if (auto v = r.integer("run", "union_max_bits")) c.union_options.max_enumerated_bits = static_cast<int>(*v);
  if (auto v = r.integer("run", "union_pairs")) c.union_options.sampled_pairs = non_negative(*v, "union_pairs");
  return c;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace afdm
