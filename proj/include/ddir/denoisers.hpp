#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "ddir/grid.hpp"

namespace ddir {

/// Image denoiser D. Implementations are immutable and apply() is pure.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Image apply(const Image& u) const = 0;
  /// Known or estimated contraction constant q, if any.
  virtual std::optional<double> q_hint() const { return std::nullopt; }
  virtual std::string name() const = 0;
};

/// w x w sliding median with reflective boundary.
class MedianDenoiser final : public Denoiser {
 public:
  explicit MedianDenoiser(std::size_t window = 3, std::optional<double> q = std::nullopt);

  Image apply(const Image& u) const override;
  std::optional<double> q_hint() const override { return q_; }
  std::string name() const override { return "median"; }

  std::size_t window() const noexcept { return window_; }
  MedianDenoiser with_q(double q) const { return MedianDenoiser(window_, q); }

 private:
  std::size_t window_;
  std::optional<double> q_;
};

struct TVProxOptions {
  double omega = 0.2;
  double dual_step = 0.248;
  int dual_iters = 50;
  double dual_tol = 1e-5;
};

struct TVProxStats {
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;
};

/// Isotropic total-variation proximal map, forward differences with Neumann
/// boundary, computed by Chambolle's dual projection iteration.
/// prox_{weight TV}(u) = argmin_y weight TV(y) + 0.5 ||u - y||^2.
Image tv_prox(const Image& u, double weight, const TVProxOptions& opts, TVProxStats* stats = nullptr);

/// Isotropic discrete TV, same discretization as tv_prox.
double total_variation(const Image& y);

/// Scaled TV prox: D(u) = prox_{omega TV}(u) / (1 + omega), q = 1 / (1 + omega).
class TVProximalDenoiser final : public Denoiser {
 public:
  explicit TVProximalDenoiser(TVProxOptions opts = {});

  Image apply(const Image& u) const override;
  std::optional<double> q_hint() const override { return 1.0 / (1.0 + opts_.omega); }
  std::string name() const override { return "tv-prox"; }

  /// Unscaled prox_{omega TV}(u).
  Image prox(const Image& u, TVProxStats* stats = nullptr) const;
  const TVProxOptions& options() const noexcept { return opts_; }

 private:
  TVProxOptions opts_;
};

/// D(u) = u. Contractivity boundary case (q = 1); test and CLI hook.
class IdentityDenoiser final : public Denoiser {
 public:
  Image apply(const Image& u) const override { return u; }
  std::optional<double> q_hint() const override { return 1.0; }
  std::string name() const override { return "identity"; }
};

/// D_h = h D + (1 - h) I.
class AveragedDenoiser {
 public:
  AveragedDenoiser(const Denoiser& base, double h);

  Image apply(const Image& u) const;
  /// Same as apply() when D(u) is already known.
  Image combine(const Image& u, const Image& base_out) const;
  double h() const noexcept { return h_; }
  /// Lipschitz constant 1 - h (1 - q).
  double lipschitz(double q) const noexcept { return 1.0 - h_ * (1.0 - q); }

 private:
  const Denoiser* base_;
  double h_;
};

/// Empirical contraction constant: max over num_pairs random uniform-[0,1]
/// image pairs of ||D(u) - D(v)|| / ||u - v||.
double estimate_q(const Denoiser& d, int num_pairs, std::size_t rows, std::size_t cols, RandomSource& rng);

/// (1 - q) / (1 + q)^2
double c_q(double q);

}  // namespace ddir
