#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ddir/grid.hpp"

namespace ddir {

/// Forward model G together with the action of its Frechet derivative G'(u)
/// and of the adjoint G'(u)*. Implementations are immutable after
/// construction.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  virtual Grid apply(const Image& u) const = 0;
  /// G'(u) q
  virtual Grid derivative_apply(const Image& u, const Image& q) const = 0;
  /// G'(u)* r
  virtual Image adjoint_apply(const Image& u, const Grid& r) const = 0;
  virtual bool is_linear() const noexcept = 0;

  virtual std::size_t domain_rows() const noexcept = 0;
  virtual std::size_t domain_cols() const noexcept = 0;
  virtual std::size_t range_rows() const noexcept = 0;
  virtual std::size_t range_cols() const noexcept = 0;

  Image zero_image() const { return Image(domain_rows(), domain_cols()); }
  Grid zero_data() const { return Grid(range_rows(), range_cols()); }
  void check_domain(const Image& u, const char* what) const;
  void check_range(const Grid& r, const char* what) const;
};

/// Separable Gaussian convolution with reflective (half-sample symmetric)
/// boundary extension, kernel truncated at ceil(4 sigma) and renormalized to
/// unit sum.
class GaussianBlur final : public ForwardModel {
 public:
  GaussianBlur(std::size_t rows, std::size_t cols, double sigma);
  GaussianBlur(std::size_t rows, std::size_t cols, double sigma, std::size_t radius);
  /// Kernel reduced to a unit impulse; G is the identity.
  static GaussianBlur identity(std::size_t rows, std::size_t cols);

  Grid apply(const Image& u) const override;
  Grid derivative_apply(const Image&, const Image& q) const override { return apply(q); }
  Image adjoint_apply(const Image&, const Grid& r) const override { return transpose_apply(r); }
  bool is_linear() const noexcept override { return true; }

  std::size_t domain_rows() const noexcept override { return rows_; }
  std::size_t domain_cols() const noexcept override { return cols_; }
  std::size_t range_rows() const noexcept override { return rows_; }
  std::size_t range_cols() const noexcept override { return cols_; }

  Image transpose_apply(const Grid& r) const;

  double sigma() const noexcept { return sigma_; }
  std::size_t radius() const noexcept { return radius_; }
  /// 1-D taps w[-radius..radius], stored from index 0.
  const std::vector<double>& taps() const noexcept { return taps_; }
  /// Eigenvalues of the 1-D reflective convolution on the DCT-II basis of
  /// length n: sum_j w_j cos(pi k j / n).
  std::vector<double> dct_eigenvalues(std::size_t n) const;

 private:
  GaussianBlur(std::size_t rows, std::size_t cols, std::vector<double> taps);

  std::size_t rows_;
  std::size_t cols_;
  double sigma_ = 0.0;
  std::size_t radius_;
  std::vector<double> taps_;
};

enum class RadonSupport {
  /// whole square; ceil(sqrt(2) n) detectors cover its diagonal
  full_square,
  /// pixels outside the inscribed disk are treated as zero
  inscribed_disk,
};

/// Parallel-beam discrete Radon transform over angles spaced uniformly in
/// [1, 180] degrees. Ray-driven line integrals with bilinear interpolation at
/// unit steps along each ray. adjoint_apply is the exact transpose.
class ParallelRadon final : public ForwardModel {
 public:
  ParallelRadon(std::size_t image_side, std::size_t num_angles,
                RadonSupport support = RadonSupport::full_square);

  Grid apply(const Image& u) const override { return project(u); }
  Grid derivative_apply(const Image&, const Image& q) const override { return project(q); }
  Image adjoint_apply(const Image&, const Grid& s) const override { return backproject(s); }
  bool is_linear() const noexcept override { return true; }

  std::size_t domain_rows() const noexcept override { return side_; }
  std::size_t domain_cols() const noexcept override { return side_; }
  std::size_t range_rows() const noexcept override { return angles_deg_.size(); }
  std::size_t range_cols() const noexcept override { return detectors_; }

  Grid project(const Image& u) const;
  Image backproject(const Grid& sinogram) const;

  std::size_t image_side() const noexcept { return side_; }
  std::size_t detector_count() const noexcept { return detectors_; }
  const std::vector<double>& angles_deg() const noexcept { return angles_deg_; }
  RadonSupport support() const noexcept { return support_; }
  bool in_support(std::size_t r, std::size_t c) const noexcept { return mask_[r * side_ + c] != 0; }

 private:
  template <typename Fn>
  void for_each_sample_weight(std::size_t angle, std::size_t det, Fn&& fn) const;
  void build_matrix();

  std::size_t side_;
  std::size_t detectors_;
  std::vector<double> angles_deg_;
  std::vector<double> cos_;
  std::vector<double> sin_;
  RadonSupport support_;
  std::vector<unsigned char> mask_;
  // System matrix in CSR form, one row per (angle, detector) ray; duplicate
  // pixel hits along a ray are merged.
  std::vector<std::size_t> row_start_;
  std::vector<std::uint32_t> col_index_;
  std::vector<double> weight_;
};

/// Phaseless CT: G(u) = (G_c u)^2 element-wise, with G_c a ParallelRadon.
class PhaseRetrievalModel final : public ForwardModel {
 public:
  explicit PhaseRetrievalModel(ParallelRadon radon) : radon_(std::move(radon)) {}

  Grid apply(const Image& u) const override;
  /// 2 (G_c u) .* (G_c q)
  Grid derivative_apply(const Image& u, const Image& q) const override;
  /// 2 G_c^T ((G_c u) .* r)
  Image adjoint_apply(const Image& u, const Grid& r) const override;
  bool is_linear() const noexcept override { return false; }

  std::size_t domain_rows() const noexcept override { return radon_.domain_rows(); }
  std::size_t domain_cols() const noexcept override { return radon_.domain_cols(); }
  std::size_t range_rows() const noexcept override { return radon_.range_rows(); }
  std::size_t range_cols() const noexcept override { return radon_.range_cols(); }

  const ParallelRadon& radon() const noexcept { return radon_; }

 private:
  ParallelRadon radon_;
};

/// Power-iteration estimate of ||G'(u)||, i.e. the square root of the top
/// eigenvalue of G'(u)* G'(u).
double estimate_norm_bound(const ForwardModel& model, const Image& u, int iters, RandomSource& rng);

/// Frequency-domain Wiener filter. Reflective-boundary symmetric convolution
/// is diagonal in the 2-D DCT-II basis, so the filter acts on DCT
/// coefficients: u_hat = H v_hat / (H^2 + nsr).
Image wiener_deconvolve(const GaussianBlur& model, const Grid& data, double nsr);

}  // namespace ddir
