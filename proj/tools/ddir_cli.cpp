// Experiment runner: deblurring, phase-retrieval CT, method comparison and
// denoiser contraction estimates.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ddir/experiments.hpp"
#include "ddir/log.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool small = false;
  std::vector<double> noise_levels;
  std::vector<std::string> denoisers;
  std::optional<int> max_iters;
  std::optional<double> nsr;
  std::optional<double> median_q;
  bool no_cells = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_denoisers) {
  cmd->add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "base random seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--small", f.small, "halve image sides");
  cmd->add_option("--noise-levels", f.noise_levels, "relative noise levels")->delimiter(',');
  if (with_denoisers) cmd->add_option("--denoisers", f.denoisers, "median, tv-prox")->delimiter(',');
  cmd->add_option("--max-iters", f.max_iters, "iteration cap");
  cmd->add_option("--median-q", f.median_q, "fixed median contraction constant");
  cmd->add_flag("--summary-only", f.no_cells, "skip traces and reconstructions");
}

ddir::ExperimentConfig build(ddir::Problem problem, const CommonFlags& f) {
  const auto file = f.config.empty() ? ddir::ConfigFile{} : ddir::ConfigFile::load(f.config);
  auto cfg = ddir::make_config(problem, file);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.small) ddir::apply_small(cfg);
  if (!f.noise_levels.empty()) cfg.noise_levels = f.noise_levels;
  if (!f.denoisers.empty()) cfg.denoisers = f.denoisers;
  if (f.max_iters) cfg.solver.max_iters = *f.max_iters;
  if (f.nsr) cfg.wiener_nsr = *f.nsr;
  if (f.median_q) cfg.median_q = *f.median_q;
  if (f.no_cells) cfg.write_cells = false;
  return cfg;
}

void print(const std::vector<ddir::SummaryRow>& rows) { std::cout << ddir::summary_to_csv(rows); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Denoiser-driven iterative regularization experiments"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "more logging (repeatable)");

  CommonFlags deblur_flags;
  auto* deblur = app.add_subcommand("deblur", "Gaussian deblurring study");
  add_common(deblur, deblur_flags, true);

  CommonFlags phase_flags;
  auto* phase = app.add_subcommand("phase-ct", "phase-retrieval CT study");
  add_common(phase, phase_flags, true);

  CommonFlags compare_flags;
  auto* compare = app.add_subcommand("compare", "Wiener vs PnP-FBS vs DDIR on identical data");
  add_common(compare, compare_flags, false);
  compare->add_option("--nsr", compare_flags.nsr, "Wiener noise-to-signal ratio");

  auto* estq = app.add_subcommand("estimate-q", "empirical denoiser contraction constant");
  std::string q_denoiser = "tv-prox";
  int q_pairs = 100;
  std::size_t q_side = 64;
  std::uint64_t q_seed = 2024;
  double q_omega = 0.2;
  std::size_t q_window = 3;
  estq->add_option("--denoiser", q_denoiser, "median, tv-prox or identity");
  estq->add_option("--pairs", q_pairs, "number of random image pairs")->check(CLI::PositiveNumber);
  estq->add_option("--side", q_side, "image side")->check(CLI::PositiveNumber);
  estq->add_option("--seed", q_seed, "random seed");
  estq->add_option("--omega", q_omega, "TV weight");
  estq->add_option("--window", q_window, "median window");

  CLI11_PARSE(app, argc, argv);
  ddir::set_log_level(verbosity >= 2 ? ddir::LogLevel::debug
                                     : verbosity == 1 ? ddir::LogLevel::info : ddir::LogLevel::warn);

  try {
    if (*deblur) {
      print(ddir::run_deblur(build(ddir::Problem::deblur, deblur_flags)));
    } else if (*phase) {
      print(ddir::run_phase_ct(build(ddir::Problem::phase_ct, phase_flags)));
    } else if (*compare) {
      print(ddir::run_compare(build(ddir::Problem::deblur, compare_flags)));
    } else if (*estq) {
      auto cfg = ddir::default_config(ddir::Problem::deblur);
      cfg.tv.omega = q_omega;
      cfg.median_window = q_window;
      const auto report = ddir::run_estimate_q(q_denoiser, cfg, q_pairs, q_side, q_seed);
      std::printf("denoiser,q,c_q,contractive\n%s,%.6f,%.6f,%s\n", report.denoiser.c_str(), report.q, report.c_q,
                  report.contractive ? "true" : "false");
      return report.contractive ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
