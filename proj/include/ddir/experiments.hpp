#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ddir/denoisers.hpp"
#include "ddir/phantoms.hpp"
#include "ddir/solver.hpp"

namespace ddir {

enum class Problem { deblur, phase_ct };

/// Flat key = value text with optional [section] headers. Keys are stored
/// as "section.key".
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

 private:
  std::map<std::string, std::string> values_;
};

struct ExperimentConfig {
  Problem problem = Problem::deblur;
  PhantomSpec phantom{};
  /// Shepp-Logan anti-aliasing: rasterize at side * supersample and box-average.
  int phantom_supersample = 2;
  std::optional<std::filesystem::path> phantom_file;

  double blur_sigma = 1.5;
  std::size_t num_angles = 60;

  std::vector<std::string> denoisers{"median", "tv-prox"};
  std::size_t median_window = 3;
  /// Overrides the per-grid empirical median q.
  std::optional<double> median_q;
  TVProxOptions tv{};
  int q_pairs = 100;

  SolverConfig solver = linear_defaults();
  std::vector<double> noise_levels{0.005, 0.001, 0.0005, 0.0001};
  std::uint64_t seed = 2024;

  PnPOptions pnp{};
  /// Wiener noise-to-signal ratio; delta^2 / ||v||^2 when unset.
  std::optional<double> wiener_nsr;
  /// Phase CT start: "matched-constant", "truth", or a number (constant image).
  std::string phase_init = "matched-constant";

  std::optional<std::filesystem::path> out_dir;
  /// Write traces and reconstructions, not just the summary.
  bool write_cells = true;

  void validate() const;
};

ExperimentConfig default_config(Problem problem);
/// Applies a parsed config file on top of the problem defaults.
ExperimentConfig make_config(Problem problem, const ConfigFile& file);
/// Halves image sides for quick runs.
void apply_small(ExperimentConfig& cfg);

struct SummaryRow {
  std::string problem;
  double delta_rel = 0.0;
  std::string method;
  int k_dp = -1;
  std::string termination;
  double re = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<Feasibility> feasibility;
  std::string cell;
  // Not serialized: the full iteration history and the wall time of the cell.
  IterationTrace trace;
  double noise_level = 0.0;
  double seconds = 0.0;
};

std::string summary_to_csv(const std::vector<SummaryRow>& rows);

/// Ground truth for the configured phantom.
Image make_truth(const ExperimentConfig& cfg);
/// Anti-aliased Shepp-Logan: box average of a side*factor rasterization.
Image shepp_logan_supersampled(std::size_t side, int factor);

std::unique_ptr<Denoiser> make_denoiser(const std::string& name, const ExperimentConfig& cfg, std::size_t rows,
                                        std::size_t cols);

std::vector<SummaryRow> run_deblur(const ExperimentConfig& cfg);
std::vector<SummaryRow> run_phase_ct(const ExperimentConfig& cfg);
/// Wiener, PnP-FBS and DDIR (TV prox) on identical noisy data per noise level.
std::vector<SummaryRow> run_compare(const ExperimentConfig& cfg);

struct QReport {
  std::string denoiser;
  double q = 0.0;
  double c_q = 0.0;
  bool contractive = false;
};

QReport run_estimate_q(const std::string& denoiser, const ExperimentConfig& cfg, int pairs, std::size_t side,
                       std::uint64_t seed);

}  // namespace ddir
