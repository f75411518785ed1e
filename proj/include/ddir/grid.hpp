#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddir {

/// Thrown when two grids that must agree in shape do not.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major 2-D array of doubles. Used both for images and for
/// measurement data (blurred images, sinograms).
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, double fill = 0.0);
  Grid(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const Grid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;

  Grid& operator+=(const Grid& other);
  Grid& operator-=(const Grid& other);
  Grid& operator*=(double s) noexcept;

  /// this += s * x
  Grid& axpy(double s, const Grid& x);

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Grid operator+(Grid a, const Grid& b);
Grid operator-(Grid a, const Grid& b);
Grid operator*(double s, Grid a);
/// Element-wise (Hadamard) product.
Grid hadamard(const Grid& a, const Grid& b);

using Image = Grid;

/// Data in the range of a forward model together with its noise level delta.
struct Measurement {
  Grid values;
  double noise_level = 0.0;
};

void require_same_shape(const Grid& a, const Grid& b, const char* what);

double inner(const Grid& a, const Grid& b);
double norm(const Grid& a);
double squared_norm(const Grid& a);

/// Seeded generator; identical seeds give identical draws on the same build.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  double normal();
  double uniform();
  Grid normal_grid(std::size_t rows, std::size_t cols);
  Grid uniform_grid(std::size_t rows, std::size_t cols);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Derives an independent stream seed from a base seed and an index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

/// v = clean + delta_rel * ||clean|| * z with ||z|| = 1, z a normalized
/// standard Gaussian draw over the whole array. The result's noise_level is
/// delta_rel * ||clean||.
Measurement add_noise(const Grid& clean, double delta_rel, RandomSource& rng);

}  // namespace ddir
