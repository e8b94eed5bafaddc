#include "afdm/results.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace afdm {

namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

std::optional<double> parse_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("parse_csv: bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> optional_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

nlohmann::ordered_json config_json(const SweepConfig& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["waveform"] = to_string(c.waveform);
  j["N"] = c.N;
  j["M"] = c.M;
  j["J"] = c.J;
  j["P"] = c.P;
  j["order"] = c.order;
  j["l_max"] = c.effective_l_max();
  j["k_nu"] = c.k_nu;
  j["f_c"] = c.f_c;
  j["delta_f"] = c.delta_f;
  j["velocity_kmh"] = c.velocity_kmh;
  j["doppler_budget"] = c.doppler_budget();
  j["doppler_model"] = to_string(c.doppler_model);
  j["snr_db"] = c.snr_db;
  j["detector"] = to_string(c.detector);
  j["sigma_h2"] = c.sigma_h2;
  j["error_form"] = to_string(c.error_form);
  j["rv"] = to_string(c.rv_mode);
  j["rv_frames"] = c.rv_frames;
  nlohmann::ordered_json h;
  h["preset"] = c.hwi_preset;
  h["pn"] = c.hwi.pn_enabled;
  h["psi_t"] = c.hwi.psi_t;
  h["psi_r"] = c.hwi.psi_r;
  h["lo_mode"] = to_string(c.hwi.lo_mode);
  h["cfo"] = c.hwi.cfo_enabled ? c.hwi.cfo : 0.0;
  h["dac_bits"] = c.hwi.dac_enabled ? c.hwi.dac_bits : 0;
  h["iqi_lambda"] = c.hwi.iqi_enabled ? c.hwi.iqi_lambda : 0.0;
  h["iqi_beta_rad"] = c.hwi.iqi_enabled ? c.hwi.iqi_beta : 0.0;
  h["clip_level"] = c.hwi.pa_enabled ? nlohmann::ordered_json(c.hwi.clip_level) : nlohmann::ordered_json(nullptr);
  h["symbol_power"] = c.hwi.symbol_power;
  h["dco_re"] = c.hwi.dc_offset().real();
  h["dco_im"] = c.hwi.dc_offset().imag();
  j["hwi"] = h;
  j["max_frames"] = c.max_frames;
  j["min_bit_errors"] = c.min_bit_errors;
  j["frames_per_realization"] = c.frames_per_realization;
  j["batch_size"] = c.batch_size;
  j["metric"] = to_string(c.metric);
  j["theory"] = c.theory;
  j["theory_realizations"] = c.theory_realizations;
  j["seed"] = c.seed;
  return j;
}

}  // namespace

void write_csv(const SweepResult& result, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : result.rows) {
    out << number(r.snr_db) << ',' << r.frames << ',' << r.bit_errors << ',' << cell(r.ber_sim) << ','
        << cell(r.ber_theory) << ',' << cell(r.ber_lower) << ',' << cell(r.mean_sinr_db) << '\n';
  }
}

std::string to_csv(const SweepResult& result) {
  std::ostringstream out;
  write_csv(result, out);
  return out.str();
}

std::vector<SweepRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("parse_csv: header mismatch");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 7) throw std::invalid_argument("parse_csv: expected 7 fields");
    SweepRow r;
    r.snr_db = std::stod(f[0]);
    r.frames = std::stoull(f[1]);
    r.bit_errors = std::stoull(f[2]);
    r.ber_sim = parse_cell(f[3]);
    r.ber_theory = parse_cell(f[4]);
    r.ber_lower = parse_cell(f[5]);
    r.mean_sinr_db = parse_cell(f[6]);
    rows.push_back(r);
  }
  return rows;
}

std::string to_json(const SweepResult& result, bool include_wall_time) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json meta;
  meta["code_version"] = kCodeVersion;
  meta["seed"] = result.config.seed;
  meta["theory_sampled"] = result.theory_sampled;
  meta["config"] = config_json(result.config);
  j["metadata"] = meta;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : result.rows) {
    nlohmann::ordered_json row;
    row["snr_db"] = r.snr_db;
    row["frames"] = r.frames;
    row["bit_errors"] = r.bit_errors;
    row["ber_sim"] = optional_json(r.ber_sim);
    row["ber_theory"] = optional_json(r.ber_theory);
    row["ber_lower"] = optional_json(r.ber_lower);
    row["mean_sinr_db"] = optional_json(r.mean_sinr_db);
    if (include_wall_time) row["wall_time_s"] = r.wall_time_s;
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::vector<SweepRow> parse_json_rows(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  std::vector<SweepRow> rows;
  for (const auto& row : j.at("rows")) {
    SweepRow r;
    r.snr_db = row.at("snr_db").get<double>();
    r.frames = row.at("frames").get<std::uint64_t>();
    r.bit_errors = row.at("bit_errors").get<std::uint64_t>();
    r.ber_sim = optional_from_json(row.at("ber_sim"));
    r.ber_theory = optional_from_json(row.at("ber_theory"));
    r.ber_lower = optional_from_json(row.at("ber_lower"));
    r.mean_sinr_db = optional_from_json(row.at("mean_sinr_db"));
    if (row.contains("wall_time_s")) r.wall_time_s = row.at("wall_time_s").get<double>();
    rows.push_back(r);
  }
  return rows;
}

void emit_results(const SweepResult& result, const std::string& format, const std::string& path,
                  bool include_wall_time) {
  std::string body;
  if (format == "csv") body = to_csv(result);
  else if (format == "json") body = to_json(result, include_wall_time);
  else throw std::invalid_argument("emit_results: format must be csv or json");
  if (path == "-" || path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_results: cannot open '" + path + "'");
  out << body;
}

}  // namespace afdm
