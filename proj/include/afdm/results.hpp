// results.hpp - sweep result records and their CSV / JSON forms

#pragma once

#include "afdm/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace afdm {

struct SweepRow {
  double snr_db = 0.0;
  std::uint64_t frames = 0;
  std::uint64_t bit_errors = 0;
  std::optional<double> ber_sim;     ///< bit_errors / (frames L_b), empty without Monte Carlo
  std::optional<double> ber_theory;  ///< union bound (ML) or closed form (LMMSE)
  std::optional<double> ber_lower;   ///< Jensen bound (LMMSE)
  std::optional<double> mean_sinr_db;
  double wall_time_s = 0.0;

  bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepRow> rows;  ///< sorted by snr_db
  bool theory_sampled = false;
};

inline constexpr const char* kCsvHeader = "snr_db,frames,bit_errors,ber_sim,ber_theory,ber_lower,mean_sinr_db";

void write_csv(const SweepResult& result, std::ostream& out);
std::string to_csv(const SweepResult& result);
/// Rows from CSV text (header must match exactly).
std::vector<SweepRow> parse_csv(const std::string& text);

/// JSON with a config echo. wall_time_s is only written when requested.
std::string to_json(const SweepResult& result, bool include_wall_time = false);
std::vector<SweepRow> parse_json_rows(const std::string& text);

/// Writes CSV or JSON to `path` ("-" for stdout).
void emit_results(const SweepResult& result, const std::string& format, const std::string& path,
                  bool include_wall_time = false);

inline constexpr const char* kCodeVersion = "1.0.0";

}  // namespace afdm
