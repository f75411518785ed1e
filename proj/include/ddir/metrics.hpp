#pragma once

#include <cstddef>

#include "ddir/grid.hpp"

namespace ddir {

struct MetricReport {
  double re = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// ||rec - truth|| / ||truth||
double relative_error(const Image& truth, const Image& rec);

/// 20 log10(1 / rms(truth - rec)) for peak value 1. Identical images give
/// +infinity.
double psnr(const Image& truth, const Image& rec);

struct SsimOptions {
  std::size_t window = 7;
  double dynamic_range = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean structural similarity over all fully contained window positions,
/// uniform window, sample (N-1) covariance normalization.
double ssim(const Image& a, const Image& b, const SsimOptions& opts = {});

MetricReport evaluate(const Image& truth, const Image& rec);

}  // namespace ddir
