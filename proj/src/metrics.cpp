#include "ddir/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ddir {

double relative_error(const Image& truth, const Image& rec) {
  require_same_shape(truth, rec, "relative_error");
  const double tn = norm(truth);
  if (tn == 0.0) throw std::invalid_argument("relative_error: ground truth is zero");
  return norm(rec - truth) / tn;
}

double psnr(const Image& truth, const Image& rec) {
  require_same_shape(truth, rec, "psnr");
  if (truth.empty()) throw std::invalid_argument("psnr: empty image");
  const double mse = squared_norm(truth - rec) / static_cast<double>(truth.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

namespace {

// Box sums over every window x window position, computed separably.
Grid box_sums(const Grid& g, std::size_t w) {
  const std::size_t out_r = g.rows() - w + 1;
  const std::size_t out_c = g.cols() - w + 1;
  Grid horiz(g.rows(), out_c);
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < out_c; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < w; ++j) s += g(r, c + j);
      horiz(r, c) = s;
    }
  }
  Grid out(out_r, out_c);
  for (std::size_t r = 0; r < out_r; ++r) {
    for (std::size_t c = 0; c < out_c; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < w; ++i) s += horiz(r + i, c);
      out(r, c) = s;
    }
  }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b, const SsimOptions& opts) {
  require_same_shape(a, b, "ssim");
  const std::size_t w = opts.window;
  if (w == 0 || a.rows() < w || a.cols() < w) {
    throw std::invalid_argument("ssim: image smaller than the " + std::to_string(w) + "x" + std::to_string(w) +
                                " window");
  }
  const double c1 = (opts.k1 * opts.dynamic_range) * (opts.k1 * opts.dynamic_range);
  const double c2 = (opts.k2 * opts.dynamic_range) * (opts.k2 * opts.dynamic_range);
  const double np = static_cast<double>(w * w);
  const double cov_norm = np / (np - 1.0);

  const Grid sa = box_sums(a, w);
  const Grid sb = box_sums(b, w);
  const Grid saa = box_sums(hadamard(a, a), w);
  const Grid sbb = box_sums(hadamard(b, b), w);
  const Grid sab = box_sums(hadamard(a, b), w);

  double total = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double ma = sa[i] / np;
    const double mb = sb[i] / np;
    const double va = cov_norm * (saa[i] / np - ma * ma);
    const double vb = cov_norm * (sbb[i] / np - mb * mb);
    const double vab = cov_norm * (sab[i] / np - ma * mb);
    total += ((2.0 * ma * mb + c1) * (2.0 * vab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(sa.size());
}

MetricReport evaluate(const Image& truth, const Image& rec) {
  return MetricReport{relative_error(truth, rec), psnr(truth, rec), ssim(truth, rec)};
}

}  // namespace ddir
