// afdm_sim - command-line front end for sweeps and analytic curves
//
//   afdm_sim simulate --config run.ini [--preset NAME] [--seed S] [--out PATH]
//                     [--format csv|json] [--workers K]
//   afdm_sim analyze  --config run.ini [...same options...]
//   afdm_sim presets
//
// Exit status: 0 on success, 2 on a configuration error, 1 otherwise.

#include "afdm/config.hpp"
#include "afdm/hwi.hpp"
#include "afdm/results.hpp"
#include "afdm/sweep.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kConfigError = 2;

struct Options {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out = "-";
  std::string format = "csv";
  int workers = 0;
  bool wall_time = false;
};

std::vector<afdm::SweepConfig> resolve(const Options& opt) {
  std::vector<afdm::SweepConfig> configs;
  const bool has_config = !opt.config.empty();
  std::optional<afdm::HwiConfig> hwi;
  if (!opt.preset.empty()) {
    hwi = afdm::hwi_preset(opt.preset);
    if (!hwi) {
      const auto recipe = afdm::find_recipe(opt.preset);
      if (!recipe) throw afdm::ConfigError("unknown preset '" + opt.preset + "'");
      if (has_config) throw afdm::ConfigError("a figure preset replaces --config; give one or the other");
      configs = recipe->variants;
    }
  }
  if (configs.empty()) {
    if (!has_config) throw afdm::ConfigError("--config is required unless a figure preset is given");
    afdm::SweepConfig c = afdm::load_config(opt.config);
    if (hwi) {
      c.hwi = *hwi;
      c.hwi_preset = opt.preset;
    }
    configs.push_back(c);
  }
  for (auto& c : configs) {
    if (opt.seed) c.seed = *opt.seed;
    c.validate();
  }
  return configs;
}

std::string variant_path(const std::string& out, const std::string& name, std::size_t count) {
  if (count == 1 || out == "-") return out;
  std::filesystem::path p(out);
  const std::string stem = p.stem().string() + "." + name;
  return (p.parent_path() / (stem + p.extension().string())).string();
}

int execute(const Options& opt, bool analytic_only) {
  const std::vector<afdm::SweepConfig> configs = resolve(opt);
  if (opt.format != "csv" && opt.format != "json") throw afdm::ConfigError("--format must be csv or json");
  const int workers = opt.workers > 0 ? opt.workers : afdm::default_workers();
  for (const auto& c : configs) {
    const afdm::SweepResult r = analytic_only ? afdm::run_analysis(c, workers) : afdm::run_sweep(c, workers);
    const std::string path = variant_path(opt.out, c.name, configs.size());
    if (path == "-" && configs.size() > 1) std::cout << "# " << c.name << '\n';
    afdm::emit_results(r, opt.format, path, opt.wall_time);
  }
  return 0;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "INI-style configuration file");
  cmd->add_option("--preset", opt.preset, "ideal, scheme1, scheme2 or a figure preset (fig3 ... fig12)");
  cmd->add_option("--seed", opt.seed, "master seed (overrides the file)");
  cmd->add_option("--out", opt.out, "output path, '-' for stdout");
  cmd->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--workers", opt.workers, "worker threads (default: AFDM_WORKERS or 1)")->check(CLI::Range(1, 1024));
  cmd->add_flag("--wall-time", opt.wall_time, "include per-row wall time in JSON output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO-AFDM link-level simulator under hardware impairments"};
  app.require_subcommand(1);
  Options sim_opt;
  Options ana_opt;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo BER sweep");
  CLI::App* analyze = app.add_subcommand("analyze", "analytic curves only");
  CLI::App* presets = app.add_subcommand("presets", "list figure presets");
  add_common(simulate, sim_opt);
  add_common(analyze, ana_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (presets->parsed()) {
      for (const auto& r : afdm::figure_recipes()) {
        std::cout << r.name << ": " << r.description << '\n';
        for (const auto& v : r.variants) std::cout << "  " << v.name << '\n';
      }
      return 0;
    }
    if (simulate->parsed()) return execute(sim_opt, false);
    return execute(ana_opt, true);
  } catch (const afdm::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
