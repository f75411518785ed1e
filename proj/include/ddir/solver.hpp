#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddir/denoisers.hpp"
#include "ddir/grid.hpp"
#include "ddir/operators.hpp"

namespace ddir {

/// Default averaging schedule min(1/(k+1), 1 - 1e-6).
double default_h_schedule(int k);

struct SolverConfig {
  double gamma0 = 0.1;
  double gamma1 = 0.4;
  /// Lower bound on the step size assumed by the monotonicity theory.
  double gamma = 0.3;
  double nu0 = 0.1;
  double nu1 = 0.3;
  double tau = 2.0;
  int max_iters = 1000;
  std::function<double(int)> h_schedule = default_h_schedule;
  /// Tangential cone constant; 0 for linear models.
  double zeta = 0.0;
  /// Power of the denoiser gap in the lambda denominator (1 or 2).
  int lambda_exponent = 2;
  /// Exact-data variant stops once the residual drops to this value.
  double residual_floor = 0.0;
  /// Abort when the residual exceeds this multiple of its initial value.
  double divergence_factor = 10.0;

  void validate() const;
};

/// Deblurring parameters used with linear forward models.
SolverConfig linear_defaults();
/// Phase-retrieval CT parameters.
SolverConfig phase_ct_defaults();

struct IterationRecord {
  int k = 0;
  double residual = 0.0;
  // Quantities used to form u_{k+1}; NaN on the final record.
  double mu = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double h = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  /// ||u_k - truth||, NaN when no truth was supplied.
  double error = std::numeric_limits<double>::quiet_NaN();
};

using IterationTrace = std::vector<IterationRecord>;

/// Serializes with header k,residual,mu,lambda,h,gap,error; NaN fields are
/// left empty.
std::string trace_to_csv(const IterationTrace& trace);

struct Feasibility {
  /// gamma - nu0 (nu1 - c_q) - gamma1 (gamma0 + zeta + (1 + zeta) / tau)
  double C = 0.0;
  /// gamma - gamma1 (gamma0 + zeta) - nu0 (nu1 - c_q), the exact-data constant
  double C0 = 0.0;
  /// gamma0 + zeta + (1 + zeta) / tau
  double H = 0.0;
  double c_q = 0.0;
  /// C > 0 and c_q <= nu1
  bool ok = false;
  /// H < 1 (necessary for C > 0 when the denoiser term vanishes)
  bool structural_ok = false;
};

Feasibility check_feasibility(const SolverConfig& cfg, double c_q_value);

enum class Termination { discrepancy_satisfied, max_iters_reached, residual_floor_reached, relative_change };

std::string to_string(Termination t);

struct ReconstructionResult {
  Image reconstruction;
  int stopping_index = 0;
  Termination termination = Termination::max_iters_reached;
  IterationTrace trace;
  std::optional<Feasibility> feasibility;
  /// First iteration at which the exact-data variant switched to pure
  /// gradient descent.
  std::optional<int> switch_index;
};

/// Raised when an iterate becomes non-finite or the residual blows up.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, IterationTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const IterationTrace& trace() const noexcept { return trace_; }

 private:
  IterationTrace trace_;
};

/// min{gamma0 ||r||^2 / ||g||^2, gamma1}, or gamma1 when g = 0.
double mu_from_norms(double residual_sq, double gradient_sq, const SolverConfig& cfg);
/// Step size for residual r = G(u) - v, with g = G'(u)* r.
double compute_mu(const ForwardModel& model, const Image& u, const Grid& residual, const SolverConfig& cfg);

/// min{nu0 ||r||^2 / gap^e, nu1}, or 0 when the gap vanishes.
double lambda_from_norms(double residual_norm, double gap, double u_norm, const SolverConfig& cfg,
                         int exponent);
double compute_lambda(const Image& u, const Image& denoised, double residual_norm, const SolverConfig& cfg);

struct SolveOptions {
  std::optional<Image> truth;
  /// Overrides the denoiser's q for the feasibility report.
  std::optional<double> q_override;
};

/// Denoiser-driven iterative regularization with discrepancy stopping:
/// u_{k+1} = u_k - mu_k G'(u_k)*(G(u_k) - v) - lambda_k (u_k - D_{h_k}(u_k))
/// until ||G(u_k) - v|| <= tau delta.
ReconstructionResult ddir_solve(const ForwardModel& model, const Measurement& data, const Denoiser& denoiser,
                                const Image& u0, const SolverConfig& cfg, const SolveOptions& opts = {});

/// Exact-data variant: no discrepancy test, and once the denoiser gap is
/// observed to vanish lambda stays 0 (adaptive Landweber from then on).
ReconstructionResult ddir_solve_exact(const ForwardModel& model, const Measurement& data,
                                      const Denoiser& denoiser, const Image& u0, const SolverConfig& cfg,
                                      const SolveOptions& opts = {});

struct PnPOptions {
  double alpha = 0.01;
  double step = 1.0;
  double rel_tol = 1e-6;
  int max_iters = 1000;
  /// Inner TV solver settings; omega is ignored (the prox weight is alpha * step).
  TVProxOptions prox{};
  std::optional<Image> truth;
};

/// Plug-and-play forward-backward splitting:
/// u_{k+1} = prox_{alpha s TV}(u_k - s G*(G u_k - v)).
ReconstructionResult pnp_fbs_solve(const ForwardModel& model, const Measurement& data, const Image& u0,
                                   const PnPOptions& opts);

/// Error-monotonicity and residual-sum checks on a finished trace.
struct TraceAudit {
  /// Largest increase of ||u_k - truth|| between consecutive records before
  /// the stopping index (<= 0 when monotone).
  double max_error_increase = 0.0;
  /// Sum of squared residuals over k < stopping index.
  double residual_sq_sum = 0.0;
  /// The discrepancy rule held exactly at the stopping index only.
  bool discrepancy_consistent = false;
  /// min/max of mu and lambda over the recorded updates.
  double mu_min = 0.0, mu_max = 0.0, lambda_min = 0.0, lambda_max = 0.0;
};

TraceAudit audit_trace(const ReconstructionResult& result, double tau, double delta);

}  // namespace ddir
