#include "ddir/denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "ddir/log.hpp"

namespace ddir {

namespace {

std::size_t reflect(long i, long n) {
  const long period = 2 * n;
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < n ? m : period - 1 - m);
}

}  // namespace

// ---------------------------------------------------------------------------

MedianDenoiser::MedianDenoiser(std::size_t window, std::optional<double> q) : window_(window), q_(q) {
  if (window == 0 || window % 2 == 0) {
    throw std::invalid_argument("MedianDenoiser: window must be odd and positive, got " + std::to_string(window));
  }
}

Image MedianDenoiser::apply(const Image& u) const {
  const long nr = static_cast<long>(u.rows());
  const long nc = static_cast<long>(u.cols());
  const long half = static_cast<long>(window_ / 2);
  Image out(u.rows(), u.cols());
  std::vector<double> buf(window_ * window_);
  const auto mid = buf.begin() + static_cast<long>((buf.size() - 1) / 2);
  for (long r = 0; r < nr; ++r) {
    for (long c = 0; c < nc; ++c) {
      std::size_t k = 0;
      for (long dr = -half; dr <= half; ++dr) {
        const std::size_t rr = reflect(r + dr, nr);
        for (long dc = -half; dc <= half; ++dc) buf[k++] = u(rr, reflect(c + dc, nc));
      }
      std::nth_element(buf.begin(), mid, buf.end());
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = *mid;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Total variation

namespace {

// Forward differences, zero across the last row/column (Neumann).
void gradient(const Image& y, Grid& gx, Grid& gy) {
  const std::size_t nr = y.rows();
  const std::size_t nc = y.cols();
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      gx(r, c) = c + 1 < nc ? y(r, c + 1) - y(r, c) : 0.0;
      gy(r, c) = r + 1 < nr ? y(r + 1, c) - y(r, c) : 0.0;
    }
  }
}

// div = -grad^T
void divergence(const Grid& px, const Grid& py, Grid& out) {
  const std::size_t nr = px.rows();
  const std::size_t nc = px.cols();
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      double dx = 0.0;
      if (c + 1 < nc) dx += px(r, c);
      if (c > 0) dx -= px(r, c - 1);
      double dy = 0.0;
      if (r + 1 < nr) dy += py(r, c);
      if (r > 0) dy -= py(r - 1, c);
      out(r, c) = dx + dy;
    }
  }
}

}  // namespace

double total_variation(const Image& y) {
  Grid gx(y.rows(), y.cols());
  Grid gy(y.rows(), y.cols());
  gradient(y, gx, gy);
  double tv = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) tv += std::hypot(gx[i], gy[i]);
  return tv;
}

Image tv_prox(const Image& u, double weight, const TVProxOptions& opts, TVProxStats* stats) {
  if (!(weight > 0.0)) throw std::invalid_argument("tv_prox: weight must be positive");
  if (!(opts.dual_step > 0.0) || opts.dual_step > 0.25) {
    throw std::invalid_argument("tv_prox: dual_step must lie in (0, 1/4]");
  }
  const std::size_t nr = u.rows();
  const std::size_t nc = u.cols();
  Grid px(nr, nc), py(nr, nc), div(nr, nc), g(nr, nc), gx(nr, nc), gy(nr, nc);
  double step = opts.dual_step;
  double prev_change = 0.0;
  int rising = 0;
  TVProxStats local;
  for (int it = 0; it < opts.dual_iters; ++it) {
    divergence(px, py, div);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = div[i] - u[i] / weight;
    gradient(g, gx, gy);
    double change = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double denom = 1.0 + step * std::hypot(gx[i], gy[i]);
      const double nx = (px[i] + step * gx[i]) / denom;
      const double ny = (py[i] + step * gy[i]) / denom;
      change = std::max({change, std::abs(nx - px[i]), std::abs(ny - py[i])});
      px[i] = nx;
      py[i] = ny;
    }
    local.iterations = it + 1;
    local.last_change = change;
    if (change < opts.dual_tol) {
      local.converged = true;
      break;
    }
    // Sustained growth of the dual update means the step is too long for
    // this input; drop to the provably stable 1/8.
    rising = (it > 0 && change > prev_change) ? rising + 1 : 0;
    if (rising >= 5 && step > 0.125) {
      step = 0.125;
      rising = 0;
      log_debug("tv_prox: dual iteration oscillating, step reduced to 1/8");
    }
    prev_change = change;
  }
  if (!local.converged) {
    log_debug("tv_prox: dual iteration stopped after " + std::to_string(local.iterations) +
              " iterations, last change " + std::to_string(local.last_change));
  }
  if (stats) *stats = local;
  divergence(px, py, div);
  Image out(nr, nc);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] - weight * div[i];
  return out;
}

TVProximalDenoiser::TVProximalDenoiser(TVProxOptions opts) : opts_(opts) {
  if (!(opts_.omega > 0.0)) throw std::invalid_argument("TVProximalDenoiser: omega must be positive");
  if (!(opts_.dual_step > 0.0) || opts_.dual_step > 0.25) {
    throw std::invalid_argument("TVProximalDenoiser: dual_step must lie in (0, 1/4]");
  }
  if (opts_.dual_iters < 1) throw std::invalid_argument("TVProximalDenoiser: dual_iters must be >= 1");
}

Image TVProximalDenoiser::prox(const Image& u, TVProxStats* stats) const {
  return tv_prox(u, opts_.omega, opts_, stats);
}

Image TVProximalDenoiser::apply(const Image& u) const {
  Image out = prox(u);
  out *= 1.0 / (1.0 + opts_.omega);
  return out;
}

// ---------------------------------------------------------------------------

AveragedDenoiser::AveragedDenoiser(const Denoiser& base, double h) : base_(&base), h_(h) {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("AveragedDenoiser: h must lie in (0, 1)");
}

Image AveragedDenoiser::apply(const Image& u) const { return combine(u, base_->apply(u)); }

Image AveragedDenoiser::combine(const Image& u, const Image& base_out) const {
  require_same_shape(u, base_out, "AveragedDenoiser");
  Image out(u.rows(), u.cols());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = h_ * base_out[i] + (1.0 - h_) * u[i];
  return out;
}

double estimate_q(const Denoiser& d, int num_pairs, std::size_t rows, std::size_t cols, RandomSource& rng) {
  if (num_pairs < 1) throw std::invalid_argument("estimate_q: num_pairs must be >= 1");
  double q = 0.0;
  for (int i = 0; i < num_pairs; ++i) {
    Image a = rng.uniform_grid(rows, cols);
    Image b = rng.uniform_grid(rows, cols);
    double diff = norm(a - b);
    while (diff == 0.0) {
      b = rng.uniform_grid(rows, cols);
      diff = norm(a - b);
    }
    q = std::max(q, norm(d.apply(a) - d.apply(b)) / diff);
  }
  return q;
}

double c_q(double q) { return (1.0 - q) / ((1.0 + q) * (1.0 + q)); }

}  // namespace ddir
