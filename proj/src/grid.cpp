#include "ddir/grid.hpp"

#include <cmath>
#include <string>

namespace ddir {

Grid::Grid(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Grid::Grid(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ShapeError("Grid: value count " + std::to_string(values_.size()) +
                     " does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

bool Grid::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Grid& Grid::operator+=(const Grid& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Grid& Grid::operator-=(const Grid& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Grid& Grid::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

Grid& Grid::axpy(double s, const Grid& x) {
  require_same_shape(*this, x, "axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * x.values_[i];
  return *this;
}

Grid operator+(Grid a, const Grid& b) { return a += b; }
Grid operator-(Grid a, const Grid& b) { return a -= b; }
Grid operator*(double s, Grid a) { return a *= s; }

Grid hadamard(const Grid& a, const Grid& b) {
  require_same_shape(a, b, "hadamard");
  Grid out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) +
                     "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                     "x" + std::to_string(b.cols()));
  }
}

double inner(const Grid& a, const Grid& b) {
  require_same_shape(a, b, "inner");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double squared_norm(const Grid& a) {
  double sum = 0.0;
  for (double v : a.values()) sum += v * v;
  return sum;
}

double norm(const Grid& a) { return std::sqrt(squared_norm(a)); }

double RandomSource::normal() { return normal_(engine_); }
double RandomSource::uniform() { return uniform_(engine_); }

Grid RandomSource::normal_grid(std::size_t rows, std::size_t cols) {
  Grid g(rows, cols);
  for (double& v : g.values()) v = normal();
  return g;
}

Grid RandomSource::uniform_grid(std::size_t rows, std::size_t cols) {
  Grid g(rows, cols);
  for (double& v : g.values()) v = uniform();
  return g;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Measurement add_noise(const Grid& clean, double delta_rel, RandomSource& rng) {
  if (!(delta_rel >= 0.0) || !std::isfinite(delta_rel)) {
    throw std::invalid_argument("add_noise: delta_rel must be a finite nonnegative number");
  }
  if (delta_rel == 0.0) return Measurement{clean, 0.0};
  const double clean_norm = norm(clean);
  if (clean_norm == 0.0) {
    throw std::invalid_argument("add_noise: positive noise requested on all-zero data");
  }
  Grid z = rng.normal_grid(clean.rows(), clean.cols());
  double z_norm = norm(z);
  while (z_norm == 0.0) {
    z = rng.normal_grid(clean.rows(), clean.cols());
    z_norm = norm(z);
  }
  const double delta = delta_rel * clean_norm;
  Grid noisy = clean;
  noisy.axpy(delta / z_norm, z);
  return Measurement{std::move(noisy), delta};
}

}  // namespace ddir
