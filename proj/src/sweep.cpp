#include "afdm/sweep.hpp"

#include "afdm/analysis.hpp"
#include "afdm/detectors.hpp"

#include <bit>
#include <chrono>
#include <cstdlib>
#include <limits>

namespace afdm {

namespace {

// Seed streams kept apart from the per-SNR trial streams.
constexpr std::uint64_t kTheoryStream = 0x7468656f7279ULL;
constexpr std::uint64_t kAnalysisStream = 0x616e616c79ULL;

double sigma2_of(double snr_db) { return 1.0 / db_to_linear(snr_db); }

ImpairedLink draw_link(const SweepConfig& config, const AfdmParams& params, const CMatrix& daft, double sigma2,
                       Rng& rng) {
  const ChannelRealization ch = sample_channel(config.M, config.J, config.P, params, config.doppler_budget(),
                                               config.doppler_model, rng);
  const MultiplicativeState mult = sample_multiplicative(config.hwi, params, config.M, config.J, rng);
  return realize_link(ch, config.hwi, sigma2, mult, daft);
}

std::uint64_t count_bit_errors(const std::vector<int>& sent, const std::vector<int>& got) {
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < sent.size(); ++i)
    errors += static_cast<std::uint64_t>(std::popcount(static_cast<unsigned>(sent[i] ^ got[i])));
  return errors;
}

std::vector<int> random_labels(Index count, int order, Rng& rng) {
  std::uniform_int_distribution<int> dist(0, order - 1);
  std::vector<int> labels(static_cast<std::size_t>(count));
  for (auto& l : labels) l = dist(rng);
  return labels;
}

}  // namespace

int default_workers() {
  if (const char* env = std::getenv("AFDM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

TrialOutcome run_trial(const SweepConfig& config, const CMatrix& daft, double snr_db, std::uint64_t frames, Rng& rng) {
  const AfdmParams params = config.params();
  const Constellation constellation(config.order);
  const CsiModel csi = CsiModel::from_variance(config.sigma_h2);
  const double sigma2 = sigma2_of(snr_db);
  const Index nm = static_cast<Index>(config.N) * config.M;

  const ImpairedLink link = draw_link(config, params, daft, sigma2, rng);
  TrialOutcome out;
  out.frames = frames;

  if (config.detector == DetectorKind::Ml) {
    const ImpairedLink receiver = estimated_link(link, csi, rng);
    const MlDetector detector(receiver, constellation, config.ml_cap);
    for (std::uint64_t f = 0; f < frames; ++f) {
      const std::vector<int> labels = random_labels(nm, config.order, rng);
      const CVector y = receive_frame(link, constellation.symbols_from_labels(labels), rng);
      out.bit_errors += count_bit_errors(labels, detector.detect(y).labels);
    }
    return out;
  }

  const auto support = support_mask(link.channel);
  const MatrixEstimate est = inject_matrix_error(link.h_eff, support, csi, rng);
  const CMatrix rv = config.rv_mode == RvMode::Analytic
                         ? expected_rv_covariance(link)
                         : estimate_rv_covariance(link, constellation, config.rv_frames, rng);
  const Index rows = link.h_eff.rows();
  CMatrix gram;
  if (csi.is_perfect()) gram = CMatrix::Zero(rows, rows);
  else if (config.error_form == ErrorGramForm::Realization) gram = est.error * est.error.adjoint();
  else gram = expected_error_gram(support, csi.sigma_h2);

  const EqualizerReport report = lmmse_equalize(CVector(), est.estimate, gram, rv);
  out.mean_sinr = report.sinr.mean();
  out.ber_theory = lmmse_ber_approx(report, constellation);
  out.ber_lower = lmmse_ber_lower_bound(report, constellation);

  for (std::uint64_t f = 0; f < frames; ++f) {
    const std::vector<int> labels = random_labels(nm, config.order, rng);
    const CVector y = receive_frame(link, constellation.symbols_from_labels(labels), rng);
    const CVector soft = report.G * y;
    std::vector<int> got(static_cast<std::size_t>(nm));
    for (Index c = 0; c < nm; ++c) {
      const double tc = report.T(c, c).real();
      got[static_cast<std::size_t>(c)] = constellation.nearest(tc > 0.0 ? soft(c) / tc : soft(c));
    }
    out.bit_errors += count_bit_errors(labels, got);
  }
  return out;
}

std::vector<double> ml_union_bound_curve(const SweepConfig& config, int workers, bool* sampled) {
  const AfdmParams params = config.params();
  const CMatrix daft = build_daft_matrix<double>(params);
  const Constellation constellation(config.order);
  std::vector<double> grid;
  for (double s : config.snr_db) grid.push_back(sigma2_of(s));
  const Index L = static_cast<Index>(config.P) * config.M * config.J;
  const CMatrix gamma = CMatrix::Identity(L, L) / static_cast<double>(config.P);

  const std::function<UnionBoundResult(std::size_t)> fn = [&](std::size_t r) {
    Rng rng(derive_seed(config.seed, kTheoryStream, r));
    const ImpairedLink link = draw_link(config, params, daft, 1.0, rng);
    const CodewordOperator cw(link);
    return aber_union_bound(cw, constellation, gamma, grid, config.sigma_h2, config.union_options, rng);
  };
  const auto parts = parallel_map<UnionBoundResult>(static_cast<std::size_t>(config.theory_realizations), workers, fn);
  std::vector<double> curve(grid.size(), 0.0);
  bool any_sampled = false;
  for (const auto& p : parts) {
    any_sampled = any_sampled || p.sampled;
    for (std::size_t s = 0; s < grid.size(); ++s) curve[s] += p.ber[s];
  }
  for (double& v : curve) v /= static_cast<double>(parts.size());
  if (sampled) *sampled = any_sampled;
  return curve;
}

namespace {

struct Tally {
  std::uint64_t frames = 0;
  std::uint64_t bit_errors = 0;
  std::uint64_t trials = 0;
  double sinr = 0.0;
  double theory = 0.0;
  double lower = 0.0;
};

// Trials at one SNR point until the stopping rule fires (frames > 0) or for
// exactly `fixed_trials` analytic-only trials (frames == 0).
Tally run_point(const SweepConfig& config, const CMatrix& daft, std::size_t snr_idx, std::uint64_t stream,
                bool monte_carlo, std::uint64_t fixed_trials, int workers) {
  const double snr_db = config.snr_db[snr_idx];
  const auto fpr = static_cast<std::uint64_t>(config.frames_per_realization);
  const std::uint64_t total_trials = monte_carlo ? (config.max_frames + fpr - 1) / fpr : fixed_trials;
  Tally tally;
  std::uint64_t next = 0;
  bool done = false;
  while (!done && next < total_trials) {
    const std::uint64_t batch = std::min<std::uint64_t>(static_cast<std::uint64_t>(config.batch_size), total_trials - next);
    const std::uint64_t base = next;
    const std::function<TrialOutcome(std::size_t)> fn = [&](std::size_t i) {
      const std::uint64_t t = base + i;
      Rng rng(derive_seed(config.seed, stream + snr_idx, t));
      const std::uint64_t frames = monte_carlo ? std::min(fpr, config.max_frames - t * fpr) : 0;
      return run_trial(config, daft, snr_db, frames, rng);
    };
    const auto outcomes = parallel_map<TrialOutcome>(static_cast<std::size_t>(batch), workers, fn);
    for (const auto& o : outcomes) {
      tally.frames += o.frames;
      tally.bit_errors += o.bit_errors;
      tally.sinr += o.mean_sinr;
      tally.theory += o.ber_theory;
      tally.lower += o.ber_lower;
      ++tally.trials;
      if (monte_carlo && (tally.bit_errors >= config.min_bit_errors || tally.frames >= config.max_frames)) {
        done = true;
        break;
      }
    }
    next += batch;
  }
  return tally;
}

SweepResult assemble(const SweepConfig& config, bool monte_carlo, int workers) {
  config.validate();
  const CMatrix daft = build_daft_matrix<double>(config.params());
  const bool lmmse = config.detector == DetectorKind::Lmmse;
  const bool sinr_only = config.metric == Metric::Sinr;
  const bool mc = monte_carlo && !sinr_only;
  const double bits = config.bits_per_frame();

  SweepResult result;
  result.config = config;

  std::vector<double> bound;
  if (!lmmse && config.theory) bound = ml_union_bound_curve(config, workers, &result.theory_sampled);

  std::vector<std::size_t> order(config.snr_db.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return config.snr_db[a] < config.snr_db[b]; });

  for (std::size_t idx : order) {
    const auto start = std::chrono::steady_clock::now();
    SweepRow row;
    row.snr_db = config.snr_db[idx];
    const bool need_trials = mc || lmmse;
    if (need_trials) {
      const std::uint64_t stream = mc ? 0 : kAnalysisStream;
      const Tally t = run_point(config, daft, idx, stream, mc,
                                static_cast<std::uint64_t>(config.theory_realizations), workers);
      row.frames = t.frames;
      row.bit_errors = t.bit_errors;
      if (mc && t.frames > 0) row.ber_sim = static_cast<double>(t.bit_errors) / (static_cast<double>(t.frames) * bits);
      if (lmmse && t.trials > 0) {
        const double n = static_cast<double>(t.trials);
        row.mean_sinr_db = linear_to_db(t.sinr / n);
        if (config.theory && !sinr_only) {
          row.ber_theory = t.theory / n;
          row.ber_lower = t.lower / n;
        }
      }
    }
    if (!bound.empty()) row.ber_theory = bound[idx];
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config, int workers) { return assemble(config, true, workers); }

SweepResult run_analysis(const SweepConfig& config, int workers) {
  SweepConfig c = config;
  c.theory = true;
  return assemble(c, false, workers);
}

// -------------------------------------------------------------- presets

namespace {

SweepConfig lmmse_base(const std::string& name) {
  SweepConfig c;
  c.name = name;
  c.N = 32;
  c.M = 2;
  c.J = 2;
  c.P = 3;
  c.order = 4;
  c.velocity_kmh = 540.0;
  c.detector = DetectorKind::Lmmse;
  c.snr_db = snr_grid(0.0, 30.0, 5.0);
  c.max_frames = 20000;
  c.min_bit_errors = 200;
  return c;
}

const char* wf_tag(Waveform w) { return w == Waveform::Afdm ? "afdm" : "ofdm"; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::vector<FigureRecipe> figure_recipes() {
  std::vector<FigureRecipe> out;
  const Waveform waveforms[] = {Waveform::Afdm, Waveform::Ofdm};

  {
    FigureRecipe r{"fig3", "BER vs SNR under receive CFO, AFDM vs OFDM, LMMSE", {}};
    for (Waveform w : waveforms)
      for (double cfo : {0.0, 0.04, 0.08}) {
        SweepConfig c = lmmse_base(std::string("fig3-") + wf_tag(w) + "-cfo" + fmt(cfo));
        c.waveform = w;
        c.hwi.cfo_enabled = cfo != 0.0;
        c.hwi.cfo = cfo;
        r.variants.push_back(c);
      }
    out.push_back(r);
  }
  {
    FigureRecipe r{"fig4", "BER vs SNR under Wiener phase noise with common / separate oscillators", {}};
    for (Waveform w : waveforms)
      for (const char* mode : {"ideal", "clo", "slo"}) {
        SweepConfig c = lmmse_base(std::string("fig4-") + wf_tag(w) + "-" + mode);
        c.waveform = w;
        if (std::string(mode) != "ideal") {
          c.hwi.pn_enabled = true;
          c.hwi.psi_t = c.hwi.psi_r = 1e-17;
          c.hwi.lo_mode = std::string(mode) == "clo" ? LoMode::Common : LoMode::Separate;
        }
        r.variants.push_back(c);
      }
    out.push_back(r);
  }
  {
    FigureRecipe r{"fig6", "BER vs SNR with low-resolution DACs", {}};
    for (Waveform w : waveforms)
      for (int b : {0, 3, 4, 5}) {
        SweepConfig c = lmmse_base(std::string("fig6-") + wf_tag(w) + (b ? "-b" + std::to_string(b) : "-ideal"));
        c.waveform = w;
        c.hwi.dac_enabled = b > 0;
        c.hwi.dac_bits = b;
        r.variants.push_back(c);
      }
    out.push_back(r);
  }
  {
    FigureRecipe r{"fig7", "BER vs SNR under transmit IQ imbalance", {}};
    const std::pair<double, double> grid[] = {{0.0, 0.0}, {0.05, 1.0}, {0.05, 2.0}, {0.1, 1.0}};
    for (Waveform w : waveforms)
      for (const auto& [lambda, beta] : grid) {
        const bool ideal = lambda == 0.0;
        SweepConfig c = lmmse_base(std::string("fig7-") + wf_tag(w) +
                                   (ideal ? "-ideal" : "-l" + fmt(lambda) + "-b" + fmt(beta)));
        c.waveform = w;
        c.hwi.iqi_enabled = !ideal;
        c.hwi.iqi_lambda = lambda;
        c.hwi.iqi_beta = beta * kPi / 180.0;
        c.snr_db = snr_grid(0.0, 40.0, 5.0);
        r.variants.push_back(c);
      }
    out.push_back(r);
  }
  {
    FigureRecipe r{"fig8", "BER vs SNR with a soft-envelope-limiter PA", {}};
    for (Waveform w : waveforms)
      for (double clip : {0.0, 4.0, 2.0, 1.0}) {
        SweepConfig c = lmmse_base(std::string("fig8-") + wf_tag(w) + (clip > 0 ? "-clip" + fmt(clip) : "-ideal"));
        c.waveform = w;
        c.hwi.pa_enabled = clip > 0.0;
        c.hwi.clip_level = clip_level_from_db(clip);
        r.variants.push_back(c);
      }
    out.push_back(r);
  }
  {
    FigureRecipe r{"fig9", "Mean LMMSE output SINR vs input SNR under DC offset", {}};
    for (double sh2 : {0.0, 0.01})
      for (double dco : {0.0, 0.4, 0.8}) {
        SweepConfig c = lmmse_base("fig9-sh" + fmt(sh2) + "-dco" + fmt(dco));
        c.N = 64;
        c.sigma_h2 = sh2;
        c.hwi.dco_enabled = dco != 0.0;
        c.hwi.dco = {dco, 0.0};
        c.metric = Metric::Sinr;
        c.theory_realizations = 50;
        c.snr_db = snr_grid(0.0, 28.0, 4.0);
        r.variants.push_back(c);
      }
    out.push_back(r);
  }
  {
    FigureRecipe r{"fig10", "ML BER and union bound, N = 8, BPSK, 1 x 2, two paths", {}};
    for (const char* tag : {"ideal", "impcsi", "hwi", "impcsi-hwi"}) {
      SweepConfig c;
      c.name = std::string("fig10-") + tag;
      c.N = 8;
      c.M = 1;
      c.J = 2;
      c.P = 2;
      c.order = 2;
      c.detector = DetectorKind::Ml;
      c.snr_db = snr_grid(0.0, 24.0, 3.0);
      c.max_frames = 200000;
      c.min_bit_errors = 200;
      const std::string t = tag;
      if (t.find("impcsi") != std::string::npos) c.sigma_h2 = 0.02;
      if (t.find("hwi") != std::string::npos) {
        c.hwi = HwiConfig::scheme1();
        c.hwi_preset = "scheme1";
      }
      r.variants.push_back(c);
    }
    out.push_back(r);
  }
  {
    FigureRecipe r{"fig11", "LMMSE BER vs closed form, Scheme 2", {}};
    for (const char* tag : {"ideal", "impcsi", "hwi", "impcsi-hwi"}) {
      SweepConfig c = lmmse_base(std::string("fig11-") + tag);
      c.snr_db = snr_grid(0.0, 40.0, 5.0);
      const std::string t = tag;
      if (t.find("impcsi") != std::string::npos) c.sigma_h2 = 0.005;
      if (t.find("hwi") != std::string::npos) {
        c.hwi = HwiConfig::scheme2();
        c.hwi_preset = "scheme2";
      }
      r.variants.push_back(c);
    }
    out.push_back(r);
  }
  {
    FigureRecipe r{"fig12", "BER vs velocity at 20 dB with additive Scheme-1 HWIs", {}};
    for (Waveform w : waveforms)
      for (double v : {0.0, 90.0, 180.0, 270.0, 360.0, 450.0, 540.0}) {
        SweepConfig c = lmmse_base(std::string("fig12-") + wf_tag(w) + "-v" + fmt(v));
        c.waveform = w;
        c.velocity_kmh = v;
        c.hwi = HwiConfig::scheme1().additive_only();
        c.hwi_preset = "scheme1";
        c.snr_db = {20.0};
        r.variants.push_back(c);
      }
    out.push_back(r);
  }
  return out;
}

std::optional<FigureRecipe> find_recipe(const std::string& name) {
  for (auto& r : figure_recipes())
    if (r.name == name) return r;
  // a single variant by its full name
  for (auto& r : figure_recipes())
    for (auto& v : r.variants)
      if (v.name == name) return FigureRecipe{v.name, r.description, {v}};
  return std::nullopt;
}

}  // namespace afdm
