#include "ddir/operators.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ddir {

void ForwardModel::check_domain(const Image& u, const char* what) const {
  if (u.rows() != domain_rows() || u.cols() != domain_cols()) {
    throw ShapeError(std::string(what) + ": image is " + std::to_string(u.rows()) + "x" +
                     std::to_string(u.cols()) + ", model domain is " +
                     std::to_string(domain_rows()) + "x" + std::to_string(domain_cols()));
  }
}

void ForwardModel::check_range(const Grid& r, const char* what) const {
  if (r.rows() != range_rows() || r.cols() != range_cols()) {
    throw ShapeError(std::string(what) + ": data is " + std::to_string(r.rows()) + "x" +
                     std::to_string(r.cols()) + ", model range is " +
                     std::to_string(range_rows()) + "x" + std::to_string(range_cols()));
  }
}

// ---------------------------------------------------------------------------
// Gaussian blur

namespace {

// Half-sample symmetric extension: d c b a | a b c d | d c b a
std::size_t reflect_index(long i, long n) {
  const long period = 2 * n;
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < n ? m : period - 1 - m);
}

std::vector<double> gaussian_taps(double sigma, std::size_t radius) {
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(radius);
    taps[i] = std::exp(-0.5 * x * x / (sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// out[i] = sum_j w[j] in[reflect(i - j)], j in [-R, R]; stride-aware so the
// same routine filters rows and columns.
void convolve_line(const double* in, double* out, long n, long stride, const std::vector<double>& w) {
  const long radius = static_cast<long>(w.size() / 2);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long j = -radius; j <= radius; ++j) {
      acc += w[static_cast<std::size_t>(j + radius)] * in[reflect_index(i - j, n) * stride];
    }
    out[i * stride] = acc;
  }
}

void convolve_line_transpose(const double* in, double* out, long n, long stride,
                             const std::vector<double>& w) {
  const long radius = static_cast<long>(w.size() / 2);
  for (long i = 0; i < n; ++i) out[i * stride] = 0.0;
  for (long i = 0; i < n; ++i) {
    const double v = in[i * stride];
    for (long j = -radius; j <= radius; ++j) {
      out[reflect_index(i - j, n) * stride] += w[static_cast<std::size_t>(j + radius)] * v;
    }
  }
}

}  // namespace

GaussianBlur::GaussianBlur(std::size_t rows, std::size_t cols, double sigma)
    : GaussianBlur(rows, cols, sigma,
                   static_cast<std::size_t>(std::ceil(4.0 * (sigma > 0.0 ? sigma : 1.0)))) {}

GaussianBlur::GaussianBlur(std::size_t rows, std::size_t cols, double sigma, std::size_t radius)
    : rows_(rows), cols_(cols), sigma_(sigma), radius_(radius) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("GaussianBlur: sigma must be positive");
  if (radius == 0) throw std::invalid_argument("GaussianBlur: radius must be positive");
  if (rows == 0 || cols == 0) throw std::invalid_argument("GaussianBlur: empty grid");
  taps_ = gaussian_taps(sigma, radius);
}

GaussianBlur::GaussianBlur(std::size_t rows, std::size_t cols, std::vector<double> taps)
    : rows_(rows), cols_(cols), radius_(taps.size() / 2), taps_(std::move(taps)) {}

GaussianBlur GaussianBlur::identity(std::size_t rows, std::size_t cols) {
  return GaussianBlur(rows, cols, std::vector<double>{1.0});
}

Grid GaussianBlur::apply(const Image& u) const {
  check_domain(u, "GaussianBlur::apply");
  const long nr = static_cast<long>(rows_);
  const long nc = static_cast<long>(cols_);
  Grid tmp(rows_, cols_);
  Grid out(rows_, cols_);
  for (long r = 0; r < nr; ++r) {
    convolve_line(&u.values()[static_cast<std::size_t>(r * nc)], &tmp.values()[static_cast<std::size_t>(r * nc)], nc, 1, taps_);
  }
  for (long c = 0; c < nc; ++c) {
    convolve_line(&tmp.values()[static_cast<std::size_t>(c)], &out.values()[static_cast<std::size_t>(c)], nr, nc, taps_);
  }
  return out;
}

Image GaussianBlur::transpose_apply(const Grid& r) const {
  check_range(r, "GaussianBlur::adjoint_apply");
  const long nr = static_cast<long>(rows_);
  const long nc = static_cast<long>(cols_);
  Grid tmp(rows_, cols_);
  Grid out(rows_, cols_);
  for (long c = 0; c < nc; ++c) {
    convolve_line_transpose(&r.values()[static_cast<std::size_t>(c)], &tmp.values()[static_cast<std::size_t>(c)], nr, nc, taps_);
  }
  for (long row = 0; row < nr; ++row) {
    convolve_line_transpose(&tmp.values()[static_cast<std::size_t>(row * nc)], &out.values()[static_cast<std::size_t>(row * nc)], nc, 1, taps_);
  }
  return out;
}

std::vector<double> GaussianBlur::dct_eigenvalues(std::size_t n) const {
  std::vector<double> eig(n);
  const long radius = static_cast<long>(radius_);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (long j = -radius; j <= radius; ++j) {
      acc += taps_[static_cast<std::size_t>(j + radius)] *
             std::cos(std::numbers::pi * static_cast<double>(k) * static_cast<double>(j) / static_cast<double>(n));
    }
    eig[k] = acc;
  }
  return eig;
}

// ---------------------------------------------------------------------------
// Parallel-beam Radon transform

ParallelRadon::ParallelRadon(std::size_t image_side, std::size_t num_angles, RadonSupport support)
    : side_(image_side),
      detectors_(static_cast<std::size_t>(std::ceil(std::sqrt(2.0) * static_cast<double>(image_side)))),
      support_(support) {
  if (image_side == 0) throw std::invalid_argument("ParallelRadon: image_side must be positive");
  if (num_angles == 0) throw std::invalid_argument("ParallelRadon: num_angles must be positive");
  // ceil(sqrt(2) n) computed in floating point; guard against sqrt(2)*n landing
  // a hair above an integer
  const double exact = std::sqrt(2.0) * static_cast<double>(image_side);
  if (static_cast<double>(detectors_ - 1) >= exact) --detectors_;
  angles_deg_.resize(num_angles);
  for (std::size_t a = 0; a < num_angles; ++a) {
    angles_deg_[a] = num_angles == 1 ? 1.0
                                     : 1.0 + 179.0 * static_cast<double>(a) / static_cast<double>(num_angles - 1);
    const double rad = angles_deg_[a] * std::numbers::pi / 180.0;
    cos_.push_back(std::cos(rad));
    sin_.push_back(std::sin(rad));
  }
  const double center = 0.5 * static_cast<double>(side_ - 1);
  const double radius2 = 0.25 * static_cast<double>(side_) * static_cast<double>(side_);
  mask_.resize(side_ * side_);
  for (std::size_t r = 0; r < side_; ++r) {
    for (std::size_t c = 0; c < side_; ++c) {
      const double dy = static_cast<double>(r) - center;
      const double dx = static_cast<double>(c) - center;
      const bool inside = support_ == RadonSupport::full_square || dx * dx + dy * dy <= radius2;
      mask_[r * side_ + c] = inside ? 1 : 0;
    }
  }
  build_matrix();
}

void ParallelRadon::build_matrix() {
  const std::size_t rays = angles_deg_.size() * detectors_;
  row_start_.assign(rays + 1, 0);
  std::vector<std::pair<std::uint32_t, double>> hits;
  for (std::size_t a = 0; a < angles_deg_.size(); ++a) {
    for (std::size_t d = 0; d < detectors_; ++d) {
      hits.clear();
      for_each_sample_weight(a, d, [&](std::size_t idx, double w) {
        hits.emplace_back(static_cast<std::uint32_t>(idx), w);
      });
      std::stable_sort(hits.begin(), hits.end(),
                       [](const auto& x, const auto& y) { return x.first < y.first; });
      for (std::size_t i = 0; i < hits.size();) {
        const std::uint32_t idx = hits[i].first;
        double w = 0.0;
        for (; i < hits.size() && hits[i].first == idx; ++i) w += hits[i].second;
        col_index_.push_back(idx);
        weight_.push_back(w);
      }
      row_start_[a * detectors_ + d + 1] = col_index_.size();
    }
  }
}

template <typename Fn>
void ParallelRadon::for_each_sample_weight(std::size_t angle, std::size_t det, Fn&& fn) const {
  const double center = 0.5 * static_cast<double>(side_ - 1);
  const double half = 0.5 * static_cast<double>(detectors_ - 1);
  const double t = static_cast<double>(det) - half;
  const double ct = cos_[angle];
  const double st = sin_[angle];
  const long n = static_cast<long>(side_);
  for (std::size_t i = 0; i < detectors_; ++i) {
    const double s = static_cast<double>(i) - half;
    const double x = center + t * ct - s * st;
    const double y = center + t * st + s * ct;
    const double xf = std::floor(x);
    const double yf = std::floor(y);
    const long x0 = static_cast<long>(xf);
    const long y0 = static_cast<long>(yf);
    if (x0 < -1 || y0 < -1 || x0 >= n || y0 >= n) continue;
    const double fx = x - xf;
    const double fy = y - yf;
    const double w[4] = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
    const long px[4] = {x0, x0 + 1, x0, x0 + 1};
    const long py[4] = {y0, y0, y0 + 1, y0 + 1};
    for (int k = 0; k < 4; ++k) {
      if (px[k] < 0 || py[k] < 0 || px[k] >= n || py[k] >= n) continue;
      const std::size_t idx = static_cast<std::size_t>(py[k] * n + px[k]);
      if (!mask_[idx] || w[k] == 0.0) continue;
      fn(idx, w[k]);
    }
  }
}

Grid ParallelRadon::project(const Image& u) const {
  check_domain(u, "ParallelRadon::apply");
  Grid sino(angles_deg_.size(), detectors_);
  const auto px = u.values();
  for (std::size_t ray = 0; ray < sino.size(); ++ray) {
    double acc = 0.0;
    for (std::size_t j = row_start_[ray]; j < row_start_[ray + 1]; ++j) acc += weight_[j] * px[col_index_[j]];
    sino[ray] = acc;
  }
  return sino;
}

Image ParallelRadon::backproject(const Grid& sinogram) const {
  check_range(sinogram, "ParallelRadon::adjoint_apply");
  Image out(side_, side_);
  auto px = out.values();
  for (std::size_t ray = 0; ray < sinogram.size(); ++ray) {
    const double v = sinogram[ray];
    if (v == 0.0) continue;
    for (std::size_t j = row_start_[ray]; j < row_start_[ray + 1]; ++j) px[col_index_[j]] += weight_[j] * v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phase retrieval

Grid PhaseRetrievalModel::apply(const Image& u) const {
  Grid w = radon_.project(u);
  for (double& v : w.values()) v *= v;
  return w;
}

Grid PhaseRetrievalModel::derivative_apply(const Image& u, const Image& q) const {
  Grid out = hadamard(radon_.project(u), radon_.project(q));
  out *= 2.0;
  return out;
}

Image PhaseRetrievalModel::adjoint_apply(const Image& u, const Grid& r) const {
  check_range(r, "PhaseRetrievalModel::adjoint_apply");
  Image out = radon_.backproject(hadamard(radon_.project(u), r));
  out *= 2.0;
  return out;
}

// ---------------------------------------------------------------------------

double estimate_norm_bound(const ForwardModel& model, const Image& u, int iters, RandomSource& rng) {
  if (iters < 1) throw std::invalid_argument("estimate_norm_bound: iters must be >= 1");
  Image x = rng.normal_grid(model.domain_rows(), model.domain_cols());
  double xn = norm(x);
  while (xn == 0.0) {
    x = rng.normal_grid(model.domain_rows(), model.domain_cols());
    xn = norm(x);
  }
  x *= 1.0 / xn;
  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Grid gx = model.derivative_apply(u, x);
    // Rayleigh quotient of G'*G' at a unit vector
    estimate = std::max(estimate, norm(gx));
    Image y = model.adjoint_apply(u, gx);
    const double yn = norm(y);
    if (yn == 0.0) break;
    x = std::move(y);
    x *= 1.0 / yn;
  }
  return estimate;
}

namespace {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace

Image wiener_deconvolve(const GaussianBlur& model, const Grid& data, double nsr) {
  if (!(nsr >= 0.0)) throw std::invalid_argument("wiener_deconvolve: nsr must be nonnegative");
  model.check_range(data, "wiener_deconvolve");
  const int nr = static_cast<int>(data.rows());
  const int nc = static_cast<int>(data.cols());
  std::vector<double> buf(data.values().begin(), data.values().end());
  std::vector<double> coef(buf.size());

  Plan forward(fftw_plan_r2r_2d(nr, nc, buf.data(), coef.data(), FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE));
  fftw_execute(forward.get());

  const auto eig_r = model.dct_eigenvalues(data.rows());
  const auto eig_c = model.dct_eigenvalues(data.cols());
  // REDFT10 followed by REDFT01 scales by (2 nr)(2 nc)
  const double scale = 1.0 / (4.0 * nr * nc);
  for (int r = 0; r < nr; ++r) {
    for (int c = 0; c < nc; ++c) {
      const double h = eig_r[static_cast<std::size_t>(r)] * eig_c[static_cast<std::size_t>(c)];
      const double denom = h * h + nsr;
      double& v = coef[static_cast<std::size_t>(r * nc + c)];
      v = denom > 0.0 ? v * h / denom * scale : 0.0;
    }
  }

  Plan inverse(fftw_plan_r2r_2d(nr, nc, coef.data(), buf.data(), FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE));
  fftw_execute(inverse.get());
  return Image(data.rows(), data.cols(), std::move(buf));
}

}  // namespace ddir
