// sweep.hpp - seeded Monte-Carlo sweep engine and figure presets
//
// Every trial (one channel / hardware realization plus its frames) owns a
// generator seeded with derive_seed(seed, snr index, trial index). Trials run
// in fixed-size batches on a worker pool and are reduced in index order; the
// stopping rule cuts at the first trial that satisfies it. The result is
// therefore identical for any worker count.

#pragma once

#include "afdm/config.hpp"
#include "afdm/results.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace afdm {

/// Per-trial tallies.
struct TrialOutcome {
  std::uint64_t frames = 0;
  std::uint64_t bit_errors = 0;
  double mean_sinr = 0.0;  ///< linear, averaged over symbols (LMMSE)
  double ber_theory = 0.0;
  double ber_lower = 0.0;
};

/// One trial at `snr_db`: realize a link, then run `frames` frames.
/// frames == 0 evaluates the analytic per-realization quantities only.
TrialOutcome run_trial(const SweepConfig& config, const CMatrix& daft, double snr_db, std::uint64_t frames, Rng& rng);

/// Monte-Carlo sweep with analytic curves attached when config.theory is set.
SweepResult run_sweep(const SweepConfig& config, int workers);

/// Analytic curves only (union bound for ML, closed form for LMMSE averaged
/// over config.theory_realizations links).
SweepResult run_analysis(const SweepConfig& config, int workers);

/// Union bound averaged over config.theory_realizations links, one value per
/// SNR point.
std::vector<double> ml_union_bound_curve(const SweepConfig& config, int workers, bool* sampled = nullptr);

/// Runs fn(0..count-1) on `workers` threads; results come back in index order.
template <typename T>
std::vector<T> parallel_map(std::size_t count, int workers, const std::function<T(std::size_t)>& fn);

/// Worker count from AFDM_WORKERS (default 1).
int default_workers();

struct FigureRecipe {
  std::string name;
  std::string description;
  std::vector<SweepConfig> variants;  ///< each variant carries its own name
};

std::vector<FigureRecipe> figure_recipes();
std::optional<FigureRecipe> find_recipe(const std::string& name);

}  // namespace afdm

#include "afdm/detail/parallel.hpp"
