#include "ddir/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ddir/log.hpp"

namespace ddir {

double default_h_schedule(int k) { return std::min(1.0 / (k + 1.0), 1.0 - 1e-6); }

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("SolverConfig: " + msg); };
  if (!(tau > 1.0)) fail("tau must exceed 1");
  if (!(gamma0 > 0.0) || !(gamma1 > 0.0)) fail("gamma0 and gamma1 must be positive");
  if (!(gamma > 0.0) || gamma > gamma1) fail("gamma must satisfy 0 < gamma <= gamma1");
  if (!(nu0 >= 0.0) || !(nu1 >= 0.0)) fail("nu0 and nu1 must be nonnegative");
  if (!(zeta >= 0.0 && zeta < 1.0)) fail("zeta must lie in [0, 1)");
  if (max_iters < 0) fail("max_iters must be nonnegative");
  if (lambda_exponent != 1 && lambda_exponent != 2) fail("lambda_exponent must be 1 or 2");
  if (!h_schedule) fail("h_schedule is empty");
  if (!(divergence_factor > 1.0)) fail("divergence_factor must exceed 1");
}

SolverConfig linear_defaults() { return SolverConfig{}; }

SolverConfig phase_ct_defaults() {
  SolverConfig cfg;
  cfg.tau = 1.5;
  cfg.gamma0 = 0.01;
  cfg.gamma1 = 2.0;
  cfg.nu0 = 0.05;
  cfg.nu1 = 0.1;
  cfg.zeta = 0.1;
  // no step floor is reported for this model; gamma only enters the
  // feasibility diagnostic
  cfg.gamma = 0.01;
  return cfg;
}

std::string trace_to_csv(const IterationTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "k,residual,mu,lambda,h,gap,error\n";
  auto field = [&out](double v) {
    out << ',';
    if (!std::isnan(v)) out << v;
  };
  for (const auto& rec : trace) {
    out << rec.k;
    field(rec.residual);
    field(rec.mu);
    field(rec.lambda);
    field(rec.h);
    field(rec.gap);
    field(rec.error);
    out << '\n';
  }
  return out.str();
}

Feasibility check_feasibility(const SolverConfig& cfg, double c_q_value) {
  Feasibility f;
  f.c_q = c_q_value;
  f.H = cfg.gamma0 + cfg.zeta + (1.0 + cfg.zeta) / cfg.tau;
  const double denoiser_term = cfg.nu0 * (cfg.nu1 - c_q_value);
  f.C = cfg.gamma - denoiser_term - cfg.gamma1 * f.H;
  f.C0 = cfg.gamma - cfg.gamma1 * (cfg.gamma0 + cfg.zeta) - denoiser_term;
  f.structural_ok = f.H < 1.0;
  f.ok = f.C > 0.0 && c_q_value <= cfg.nu1;
  return f;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::discrepancy_satisfied: return "discrepancy-satisfied";
    case Termination::max_iters_reached: return "max-iters-reached";
    case Termination::residual_floor_reached: return "residual-floor-reached";
    case Termination::relative_change: return "relative-change";
  }
  return "unknown";
}

double mu_from_norms(double residual_sq, double gradient_sq, const SolverConfig& cfg) {
  if (gradient_sq == 0.0) return cfg.gamma1;
  return std::min(cfg.gamma0 * residual_sq / gradient_sq, cfg.gamma1);
}

double compute_mu(const ForwardModel& model, const Image& u, const Grid& residual, const SolverConfig& cfg) {
  const Image g = model.adjoint_apply(u, residual);
  return mu_from_norms(squared_norm(residual), squared_norm(g), cfg);
}

double lambda_from_norms(double residual_norm, double gap, double u_norm, const SolverConfig& cfg,
                         int exponent) {
  if (gap <= 1e-14 * u_norm || gap == 0.0) return 0.0;
  const double denom = exponent == 1 ? gap : gap * gap;
  return std::min(cfg.nu0 * residual_norm * residual_norm / denom, cfg.nu1);
}

double compute_lambda(const Image& u, const Image& denoised, double residual_norm, const SolverConfig& cfg) {
  return lambda_from_norms(residual_norm, norm(u - denoised), norm(u), cfg, cfg.lambda_exponent);
}

namespace {

double clamp_h(double h) { return std::clamp(h, 1e-12, 1.0 - 1e-6); }

std::optional<Feasibility> feasibility_for(const SolverConfig& cfg, const Denoiser& d, const SolveOptions& opts) {
  const auto q = opts.q_override ? opts.q_override : d.q_hint();
  if (!q) return std::nullopt;
  return check_feasibility(cfg, c_q(*q));
}

double error_to(const std::optional<Image>& truth, const Image& u) {
  if (!truth) return std::numeric_limits<double>::quiet_NaN();
  return norm(u - *truth);
}

// Shared loop for the noisy and exact-data variants.
ReconstructionResult run_ddir(const ForwardModel& model, const Measurement& data, const Denoiser& denoiser,
                              const Image& u0, const SolverConfig& cfg, const SolveOptions& opts, bool exact) {
  cfg.validate();
  model.check_domain(u0, "ddir_solve");
  model.check_range(data.values, "ddir_solve");
  if (opts.truth) model.check_domain(*opts.truth, "ddir_solve truth");

  ReconstructionResult result;
  result.feasibility = feasibility_for(cfg, denoiser, opts);
  if (result.feasibility && !result.feasibility->ok) {
    log_warn("ddir: parameters fail the feasibility check (C = " + std::to_string(result.feasibility->C) +
             "); running anyway");
  }

  const double threshold = exact ? cfg.residual_floor : cfg.tau * data.noise_level;
  const bool stop_on_threshold = !exact || cfg.residual_floor > 0.0;
  Image u = u0;
  Grid residual = model.apply(u) - data.values;
  double rn = norm(residual);
  const double initial_rn = rn;
  bool switched = false;

  for (int k = 0;; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.residual = rn;
    rec.error = error_to(opts.truth, u);

    if (stop_on_threshold && rn <= threshold) {
      result.trace.push_back(rec);
      result.termination = exact ? Termination::residual_floor_reached : Termination::discrepancy_satisfied;
      result.stopping_index = k;
      break;
    }
    if (k >= cfg.max_iters) {
      result.trace.push_back(rec);
      result.termination = Termination::max_iters_reached;
      result.stopping_index = k;
      break;
    }

    const double h = clamp_h(cfg.h_schedule(k));
    const AveragedDenoiser averaged(denoiser, h);
    const Image denoised = averaged.apply(u);
    Image denoiser_step = u - denoised;
    const double gap = norm(denoiser_step);
    const Image grad = model.adjoint_apply(u, residual);
    const double mu = mu_from_norms(rn * rn, squared_norm(grad), cfg);

    double lambda = 0.0;
    if (!switched) {
      lambda = lambda_from_norms(rn, gap, norm(u), cfg, cfg.lambda_exponent);
      if (exact && lambda == 0.0 && gap <= 1e-14 * norm(u)) {
        switched = true;
        result.switch_index = k;
      }
    }

    rec.h = h;
    rec.gap = gap;
    rec.mu = mu;
    rec.lambda = lambda;
    result.trace.push_back(rec);

    u.axpy(-mu, grad);
    if (lambda != 0.0) u.axpy(-lambda, denoiser_step);
    if (!u.all_finite()) {
      throw DivergenceError("ddir: non-finite iterate at k = " + std::to_string(k + 1), std::move(result.trace));
    }
    residual = model.apply(u) - data.values;
    rn = norm(residual);
    if (initial_rn > 0.0 && rn > cfg.divergence_factor * initial_rn) {
      throw DivergenceError("ddir: residual grew from " + std::to_string(initial_rn) + " to " +
                                std::to_string(rn) + " at k = " + std::to_string(k + 1),
                            std::move(result.trace));
    }
  }
  result.reconstruction = std::move(u);
  return result;
}

}  // namespace

ReconstructionResult ddir_solve(const ForwardModel& model, const Measurement& data, const Denoiser& denoiser,
                                const Image& u0, const SolverConfig& cfg, const SolveOptions& opts) {
  if (!(data.noise_level > 0.0)) {
    throw std::invalid_argument("ddir_solve: noise level must be positive; use ddir_solve_exact for exact data");
  }
  return run_ddir(model, data, denoiser, u0, cfg, opts, false);
}

ReconstructionResult ddir_solve_exact(const ForwardModel& model, const Measurement& data,
                                      const Denoiser& denoiser, const Image& u0, const SolverConfig& cfg,
                                      const SolveOptions& opts) {
  if (data.noise_level != 0.0) {
    throw std::invalid_argument("ddir_solve_exact: data must be exact (noise level 0)");
  }
  return run_ddir(model, data, denoiser, u0, cfg, opts, true);
}

ReconstructionResult pnp_fbs_solve(const ForwardModel& model, const Measurement& data, const Image& u0,
                                   const PnPOptions& opts) {
  if (!model.is_linear()) throw std::invalid_argument("pnp_fbs_solve: model must be linear");
  if (!(opts.step > 0.0) || !(opts.alpha > 0.0)) throw std::invalid_argument("pnp_fbs_solve: alpha and step must be positive");
  if (opts.max_iters < 0) throw std::invalid_argument("pnp_fbs_solve: max_iters must be nonnegative");
  model.check_domain(u0, "pnp_fbs_solve");
  model.check_range(data.values, "pnp_fbs_solve");

  RandomSource rng(0x5eed);
  const double op_norm = estimate_norm_bound(model, u0, 100, rng);
  // the power estimate approaches ||G|| from below; allow for that slack
  if (opts.step * op_norm * op_norm * (1.0 + 1e-6) >= 2.0) {
    throw std::invalid_argument("pnp_fbs_solve: step " + std::to_string(opts.step) +
                                " violates s < 2 / ||G||^2 with ||G|| ~ " + std::to_string(op_norm));
  }

  ReconstructionResult result;
  Image u = u0;
  Grid residual = model.apply(u) - data.values;
  const double weight = opts.alpha * opts.step;
  for (int k = 0;; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.residual = norm(residual);
    rec.error = error_to(opts.truth, u);
    result.trace.push_back(rec);
    if (k >= opts.max_iters) {
      result.termination = Termination::max_iters_reached;
      result.stopping_index = k;
      break;
    }
    Image forward = u;
    forward.axpy(-opts.step, model.adjoint_apply(u, residual));
    Image next = tv_prox(forward, weight, opts.prox);
    if (!next.all_finite()) throw DivergenceError("pnp_fbs: non-finite iterate", std::move(result.trace));
    const double change = norm(next - u);
    const double base = norm(u);
    u = std::move(next);
    residual = model.apply(u) - data.values;
    if (opts.rel_tol > 0.0 && change <= opts.rel_tol * base) {
      IterationRecord last;
      last.k = k + 1;
      last.residual = norm(residual);
      last.error = error_to(opts.truth, u);
      result.trace.push_back(last);
      result.termination = Termination::relative_change;
      result.stopping_index = k + 1;
      break;
    }
  }
  result.reconstruction = std::move(u);
  return result;
}

TraceAudit audit_trace(const ReconstructionResult& result, double tau, double delta) {
  TraceAudit audit;
  const auto& tr = result.trace;
  audit.mu_min = audit.lambda_min = std::numeric_limits<double>::infinity();
  audit.mu_max = audit.lambda_max = -std::numeric_limits<double>::infinity();
  audit.max_error_increase = -std::numeric_limits<double>::infinity();
  bool consistent = true;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto& rec = tr[i];
    const bool last = i + 1 == tr.size();
    if (!last) {
      audit.residual_sq_sum += rec.residual * rec.residual;
      audit.mu_min = std::min(audit.mu_min, rec.mu);
      audit.mu_max = std::max(audit.mu_max, rec.mu);
      audit.lambda_min = std::min(audit.lambda_min, rec.lambda);
      audit.lambda_max = std::max(audit.lambda_max, rec.lambda);
      if (!(rec.residual > tau * delta)) consistent = false;
      if (!std::isnan(rec.error) && !std::isnan(tr[i + 1].error)) {
        audit.max_error_increase = std::max(audit.max_error_increase, tr[i + 1].error - rec.error);
      }
    } else if (result.termination == Termination::discrepancy_satisfied) {
      if (!(rec.residual <= tau * delta)) consistent = false;
    } else {
      consistent = false;
    }
  }
  audit.discrepancy_consistent = consistent;
  return audit;
}

}  // namespace ddir
