#include "ddir/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ddir/image_io.hpp"
#include "ddir/log.hpp"
#include "ddir/metrics.hpp"
#include "ddir/operators.hpp"

namespace ddir {

// ---------------------------------------------------------------------------
// Config file

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || !std::isfinite(out)) throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  const long n = to_long(key, v);
  if (n < 0) throw std::invalid_argument("config: '" + key + "' must be nonnegative");
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::string section;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<std::string> ConfigFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (noise_levels.empty()) throw std::invalid_argument("experiment: noise_levels is empty");
  for (double d : noise_levels) {
    if (!(d > 0.0)) throw std::invalid_argument("experiment: noise levels must be positive");
  }
  if (denoisers.empty()) throw std::invalid_argument("experiment: no denoisers selected");
  for (const auto& d : denoisers) {
    if (d != "median" && d != "tv-prox" && d != "identity") throw std::invalid_argument("experiment: unknown denoiser '" + d + "'");
  }
  if (phantom_supersample < 1) throw std::invalid_argument("experiment: phantom supersample must be >= 1");
  if (q_pairs < 1) throw std::invalid_argument("experiment: q_pairs must be >= 1");
  solver.validate();
}

ExperimentConfig default_config(Problem problem) {
  ExperimentConfig cfg;
  cfg.problem = problem;
  if (problem == Problem::phase_ct) {
    cfg.phantom.kind = PhantomKind::binary_blobs;
    cfg.phantom.side = 128;
    cfg.phantom.seed = 7;
    cfg.solver = phase_ct_defaults();
    cfg.noise_levels = {0.01, 0.005, 0.003, 0.001, 0.0005};
  } else {
    cfg.phantom.kind = PhantomKind::shepp_logan;
    cfg.phantom.side = 256;
    cfg.solver = linear_defaults();
    cfg.noise_levels = {0.005, 0.001, 0.0005, 0.0001};
  }
  return cfg;
}

ExperimentConfig make_config(Problem problem, const ConfigFile& file) {
  ExperimentConfig cfg = default_config(problem);
  for (const auto& [key, v] : file.values()) {
    if (key == "experiment.noise_levels") {
      cfg.noise_levels.clear();
      for (const auto& item : split_list(v)) cfg.noise_levels.push_back(to_double(key, item));
    } else if (key == "experiment.seed") {
      cfg.seed = static_cast<std::uint64_t>(to_long(key, v));
    } else if (key == "experiment.denoisers") {
      cfg.denoisers = split_list(v);
    } else if (key == "experiment.write_cells") {
      cfg.write_cells = to_bool(key, v);
    } else if (key == "experiment.problem") {
      const char* expected = problem == Problem::deblur ? "deblur" : "phase-ct";
      if (v != expected) {
        throw std::invalid_argument("config: file is for problem '" + v + "' but '" + expected + "' was requested");
      }
    } else if (key == "phantom.kind") {
      cfg.phantom.kind = parse_phantom_kind(v);
    } else if (key == "phantom.side") {
      cfg.phantom.side = to_size(key, v);
    } else if (key == "phantom.seed") {
      cfg.phantom.seed = static_cast<std::uint64_t>(to_long(key, v));
    } else if (key == "phantom.blob_fraction") {
      cfg.phantom.blob_fraction = to_double(key, v);
    } else if (key == "phantom.supersample") {
      cfg.phantom_supersample = static_cast<int>(to_long(key, v));
    } else if (key == "phantom.file") {
      cfg.phantom_file = v;
    } else if (key == "model.sigma") {
      cfg.blur_sigma = to_double(key, v);
    } else if (key == "model.angles") {
      cfg.num_angles = to_size(key, v);
    } else if (key == "denoiser.median_window") {
      cfg.median_window = to_size(key, v);
    } else if (key == "denoiser.median_q") {
      cfg.median_q = to_double(key, v);
    } else if (key == "denoiser.omega") {
      cfg.tv.omega = to_double(key, v);
    } else if (key == "denoiser.dual_step") {
      cfg.tv.dual_step = to_double(key, v);
    } else if (key == "denoiser.dual_iters") {
      cfg.tv.dual_iters = static_cast<int>(to_long(key, v));
    } else if (key == "denoiser.dual_tol") {
      cfg.tv.dual_tol = to_double(key, v);
    } else if (key == "denoiser.q_pairs") {
      cfg.q_pairs = static_cast<int>(to_long(key, v));
    } else if (key == "solver.gamma0") {
      cfg.solver.gamma0 = to_double(key, v);
    } else if (key == "solver.gamma1") {
      cfg.solver.gamma1 = to_double(key, v);
    } else if (key == "solver.gamma") {
      cfg.solver.gamma = to_double(key, v);
    } else if (key == "solver.nu0") {
      cfg.solver.nu0 = to_double(key, v);
    } else if (key == "solver.nu1") {
      cfg.solver.nu1 = to_double(key, v);
    } else if (key == "solver.tau") {
      cfg.solver.tau = to_double(key, v);
    } else if (key == "solver.zeta") {
      cfg.solver.zeta = to_double(key, v);
    } else if (key == "solver.max_iters") {
      cfg.solver.max_iters = static_cast<int>(to_long(key, v));
    } else if (key == "solver.lambda_exponent") {
      cfg.solver.lambda_exponent = static_cast<int>(to_long(key, v));
    } else if (key == "solver.init") {
      cfg.phase_init = v;
    } else if (key == "pnp.alpha") {
      cfg.pnp.alpha = to_double(key, v);
    } else if (key == "pnp.step") {
      cfg.pnp.step = to_double(key, v);
    } else if (key == "pnp.rel_tol") {
      cfg.pnp.rel_tol = to_double(key, v);
    } else if (key == "pnp.max_iters") {
      cfg.pnp.max_iters = static_cast<int>(to_long(key, v));
    } else if (key == "wiener.nsr") {
      cfg.wiener_nsr = to_double(key, v);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void apply_small(ExperimentConfig& cfg) { cfg.phantom.side = std::max<std::size_t>(16, cfg.phantom.side / 2); }

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "problem,delta_rel,method,k_dp,termination,re,psnr,ssim,C,C0,H,feasible,cell\n";
  for (const auto& r : rows) {
    out << r.problem << ',' << format_double(r.delta_rel) << ',' << r.method << ',';
    if (r.k_dp >= 0) out << r.k_dp;
    out << ',' << r.termination << ',' << format_double(r.re) << ',' << format_double(r.psnr) << ','
        << format_double(r.ssim) << ',';
    if (r.feasibility) {
      out << format_double(r.feasibility->C) << ',' << format_double(r.feasibility->C0) << ','
          << format_double(r.feasibility->H) << ',' << (r.feasibility->ok ? "true" : "false");
    } else {
      out << ",,,";
    }
    out << ',' << r.cell << '\n';
  }
  return out.str();
}

Image shepp_logan_supersampled(std::size_t side, int factor) {
  if (factor <= 1) return shepp_logan(side);
  const auto f = static_cast<std::size_t>(factor);
  const Image hi = shepp_logan(side * f);
  Image out(side, side);
  const double inv = 1.0 / static_cast<double>(f * f);
  for (std::size_t r = 0; r < hi.rows(); ++r) {
    for (std::size_t c = 0; c < hi.cols(); ++c) out(r / f, c / f) += hi(r, c) * inv;
  }
  return out;
}

Image make_truth(const ExperimentConfig& cfg) {
  if (cfg.phantom_file) return load_image(*cfg.phantom_file);
  if (cfg.phantom.kind == PhantomKind::shepp_logan) {
    return shepp_logan_supersampled(cfg.phantom.side, cfg.phantom_supersample);
  }
  return make_phantom(cfg.phantom);
}

std::unique_ptr<Denoiser> make_denoiser(const std::string& name, const ExperimentConfig& cfg, std::size_t rows,
                                        std::size_t cols) {
  if (name == "median") {
    MedianDenoiser base(cfg.median_window);
    if (cfg.median_q) return std::make_unique<MedianDenoiser>(base.with_q(*cfg.median_q));
    RandomSource rng(derive_seed(cfg.seed, 0x71));
    const double q = estimate_q(base, cfg.q_pairs, rows, cols, rng);
    return std::make_unique<MedianDenoiser>(base.with_q(q));
  }
  if (name == "tv-prox") return std::make_unique<TVProximalDenoiser>(cfg.tv);
  if (name == "identity") return std::make_unique<IdentityDenoiser>();
  throw std::invalid_argument("unknown denoiser '" + name + "'");
}

namespace {

std::string cell_name(double delta_rel, const std::string& method) {
  return "d" + format_double(delta_rel) + "_" + method;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

struct OutputSink {
  const ExperimentConfig& cfg;
  std::string feasibility_log;

  void cell(const std::string& name, const Image& rec, const IterationTrace* trace) {
    if (!cfg.out_dir || !cfg.write_cells) return;
    if (trace) write_text(*cfg.out_dir / ("trace_" + name + ".csv"), trace_to_csv(*trace));
    save_csv(rec, *cfg.out_dir / ("rec_" + name + ".csv"));
    save_pgm(rec, *cfg.out_dir / ("rec_" + name + ".pgm"));
  }

  void feasibility(const std::string& name, const std::optional<Feasibility>& f) {
    if (!f) return;
    std::ostringstream line;
    line << name << ": C = " << format_double(f->C) << ", C0 = " << format_double(f->C0)
         << ", H = " << format_double(f->H) << ", c_q = " << format_double(f->c_q)
         << ", ok = " << (f->ok ? "true" : "false") << ", H < 1: " << (f->structural_ok ? "true" : "false")
         << '\n';
    feasibility_log += line.str();
  }

  void finish(const std::vector<SummaryRow>& rows) {
    if (!cfg.out_dir) return;
    write_text(*cfg.out_dir / "summary.csv", summary_to_csv(rows));
    if (!feasibility_log.empty()) write_text(*cfg.out_dir / "feasibility.txt", feasibility_log);
  }
};

void prepare_out_dir(const ExperimentConfig& cfg) {
  if (cfg.out_dir) std::filesystem::create_directories(*cfg.out_dir);
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

SummaryRow make_row(const char* problem, double delta_rel, const std::string& method, const Image& truth,
                    const ReconstructionResult* result, const Image& rec) {
  SummaryRow row;
  row.problem = problem;
  row.delta_rel = delta_rel;
  row.method = method;
  const MetricReport m = evaluate(truth, rec);
  row.re = m.re;
  row.psnr = m.psnr_db;
  row.ssim = m.ssim;
  if (result) {
    row.k_dp = result->stopping_index;
    row.termination = to_string(result->termination);
    row.feasibility = result->feasibility;
    row.trace = result->trace;
  } else {
    row.termination = "direct";
  }
  row.cell = cell_name(delta_rel, method);
  return row;
}

Image phase_initial_guess(const ExperimentConfig& cfg, const PhaseRetrievalModel& model, const Grid& data,
                          const Image& truth) {
  const std::size_t n = model.domain_rows();
  if (cfg.phase_init == "truth") return truth;
  if (cfg.phase_init == "matched-constant") {
    // constant c with sum G(c 1) = sum v, using G(c 1) = c^2 G(1)
    const Grid unit = model.apply(Image(n, n, 1.0));
    double data_sum = 0.0;
    double unit_sum = 0.0;
    for (double v : data.values()) data_sum += v;
    for (double v : unit.values()) unit_sum += v;
    const double c = (unit_sum > 0.0 && data_sum > 0.0) ? std::sqrt(data_sum / unit_sum) : 1.0;
    return Image(n, n, c);
  }
  return Image(n, n, to_double("solver.init", cfg.phase_init));
}

}  // namespace

std::vector<SummaryRow> run_deblur(const ExperimentConfig& cfg) {
  cfg.validate();
  prepare_out_dir(cfg);
  const Image truth = make_truth(cfg);
  const GaussianBlur model(truth.rows(), truth.cols(), cfg.blur_sigma);
  const Grid clean = model.apply(truth);
  OutputSink sink{cfg, {}};
  std::vector<SummaryRow> rows;
  std::vector<std::unique_ptr<Denoiser>> denoisers;
  for (const auto& name : cfg.denoisers) denoisers.push_back(make_denoiser(name, cfg, truth.rows(), truth.cols()));

  std::uint64_t cell = 0;
  for (double delta_rel : cfg.noise_levels) {
    for (const auto& d : denoisers) {
      RandomSource rng(derive_seed(cfg.seed, cell++));
      const Measurement data = add_noise(clean, delta_rel, rng);
      SolveOptions opts;
      opts.truth = truth;
      const Stopwatch watch;
      const auto result = ddir_solve(model, data, *d, data.values, cfg.solver, opts);
      SummaryRow row = make_row("deblur", delta_rel, d->name(), truth, &result, result.reconstruction);
      row.seconds = watch.seconds();
      row.noise_level = data.noise_level;
      log_info(row.cell + ": k_dp = " + std::to_string(row.k_dp) + ", RE = " + format_double(row.re));
      sink.cell(row.cell, result.reconstruction, &result.trace);
      sink.feasibility(row.cell, result.feasibility);
      rows.push_back(std::move(row));
    }
  }
  sink.finish(rows);
  return rows;
}

std::vector<SummaryRow> run_phase_ct(const ExperimentConfig& cfg) {
  cfg.validate();
  prepare_out_dir(cfg);
  const Image truth = make_truth(cfg);
  if (truth.rows() != truth.cols()) throw std::invalid_argument("phase-ct: phantom must be square");
  const PhaseRetrievalModel model{ParallelRadon(truth.rows(), cfg.num_angles)};
  const Grid clean = model.apply(truth);
  OutputSink sink{cfg, {}};
  if (cfg.out_dir && cfg.write_cells) save_pgm_normalized(clean, *cfg.out_dir / "sinogram_clean.pgm");
  std::vector<SummaryRow> rows;
  std::vector<std::unique_ptr<Denoiser>> denoisers;
  for (const auto& name : cfg.denoisers) denoisers.push_back(make_denoiser(name, cfg, truth.rows(), truth.cols()));

  std::uint64_t cell = 0;
  for (double delta_rel : cfg.noise_levels) {
    for (const auto& d : denoisers) {
      RandomSource rng(derive_seed(cfg.seed, cell++));
      const Measurement data = add_noise(clean, delta_rel, rng);
      SolveOptions opts;
      opts.truth = truth;
      const Stopwatch watch;
      const Image u0 = phase_initial_guess(cfg, model, data.values, truth);
      const auto result = ddir_solve(model, data, *d, u0, cfg.solver, opts);
      SummaryRow row = make_row("phase-ct", delta_rel, d->name(), truth, &result, result.reconstruction);
      row.seconds = watch.seconds();
      row.noise_level = data.noise_level;
      log_info(row.cell + ": k_dp = " + std::to_string(row.k_dp) + ", RE = " + format_double(row.re));
      sink.cell(row.cell, result.reconstruction, &result.trace);
      sink.feasibility(row.cell, result.feasibility);
      rows.push_back(std::move(row));
    }
  }
  sink.finish(rows);
  return rows;
}

std::vector<SummaryRow> run_compare(const ExperimentConfig& cfg) {
  if (cfg.problem != Problem::deblur) throw std::invalid_argument("compare: only defined for deblurring");
  cfg.validate();
  prepare_out_dir(cfg);
  const Image truth = make_truth(cfg);
  const GaussianBlur model(truth.rows(), truth.cols(), cfg.blur_sigma);
  const Grid clean = model.apply(truth);
  const TVProximalDenoiser tv(cfg.tv);
  OutputSink sink{cfg, {}};
  std::vector<SummaryRow> rows;

  std::uint64_t level = 0;
  for (double delta_rel : cfg.noise_levels) {
    RandomSource rng(derive_seed(cfg.seed, level++));
    const Measurement data = add_noise(clean, delta_rel, rng);

    const double nsr = cfg.wiener_nsr ? *cfg.wiener_nsr
                                      : (data.noise_level * data.noise_level) / squared_norm(data.values);
    Stopwatch watch;
    const Image wiener = wiener_deconvolve(model, data.values, nsr);
    SummaryRow wrow = make_row("deblur", delta_rel, "wiener", truth, nullptr, wiener);
    wrow.seconds = watch.seconds();
    wrow.noise_level = data.noise_level;
    sink.cell(wrow.cell, wiener, nullptr);
    rows.push_back(std::move(wrow));

    PnPOptions pnp = cfg.pnp;
    pnp.prox = cfg.tv;
    pnp.truth = truth;
    watch = Stopwatch{};
    const auto pres = pnp_fbs_solve(model, data, data.values, pnp);
    SummaryRow prow = make_row("deblur", delta_rel, "pnp-fbs", truth, &pres, pres.reconstruction);
    prow.seconds = watch.seconds();
    prow.noise_level = data.noise_level;
    sink.cell(prow.cell, pres.reconstruction, &pres.trace);
    rows.push_back(std::move(prow));

    SolveOptions opts;
    opts.truth = truth;
    watch = Stopwatch{};
    const auto dres = ddir_solve(model, data, tv, data.values, cfg.solver, opts);
    SummaryRow drow = make_row("deblur", delta_rel, "ddir-tv-prox", truth, &dres, dres.reconstruction);
    drow.seconds = watch.seconds();
    drow.noise_level = data.noise_level;
    sink.cell(drow.cell, dres.reconstruction, &dres.trace);
    sink.feasibility(drow.cell, dres.feasibility);
    rows.push_back(std::move(drow));
    log_info("compare d = " + format_double(delta_rel) + " done");
  }
  sink.finish(rows);
  return rows;
}

QReport run_estimate_q(const std::string& denoiser, const ExperimentConfig& cfg, int pairs, std::size_t side,
                       std::uint64_t seed) {
  if (pairs < 1) throw std::invalid_argument("estimate-q: pairs must be >= 1");
  std::unique_ptr<Denoiser> d;
  if (denoiser == "median") {
    d = std::make_unique<MedianDenoiser>(cfg.median_window);
  } else if (denoiser == "tv-prox") {
    d = std::make_unique<TVProximalDenoiser>(cfg.tv);
  } else if (denoiser == "identity") {
    d = std::make_unique<IdentityDenoiser>();
  } else {
    throw std::invalid_argument("unknown denoiser '" + denoiser + "'");
  }
  RandomSource rng(seed);
  QReport report;
  report.denoiser = denoiser;
  report.q = estimate_q(*d, pairs, side, side, rng);
  report.c_q = c_q(report.q);
  report.contractive = report.q < 1.0 - 1e-12;
  return report;
}

}  // namespace ddir
