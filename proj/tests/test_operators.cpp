#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ddir/experiments.hpp"
#include "ddir/metrics.hpp"
#include "ddir/operators.hpp"
#include "ddir/phantoms.hpp"
#include "oracles.hpp"

using namespace ddir;

namespace {

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

void check_adjoint(const ForwardModel& model, RandomSource& rng, int trials) {
  for (int t = 0; t < trials; ++t) {
    const Image u = rng.normal_grid(model.domain_rows(), model.domain_cols());
    const Image q = rng.normal_grid(model.domain_rows(), model.domain_cols());
    const Grid r = rng.normal_grid(model.range_rows(), model.range_cols());
    const double lhs = inner(model.derivative_apply(u, q), r);
    const double rhs = inner(q, model.adjoint_apply(u, r));
    CHECK(rel_gap(lhs, rhs) <= 1e-10);
  }
}

}  // namespace

TEST_CASE("blur keeps constants and has unit-sum taps") {
  const GaussianBlur blur(20, 17, 1.5);
  CHECK(blur.radius() == 6);
  double sum = 0.0;
  for (double t : blur.taps()) sum += t;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  const Grid out = blur.apply(Image(20, 17, 0.37));
  for (double v : out.values()) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));
  CHECK_THROWS_AS(blur.apply(Image(20, 16)), ShapeError);
  CHECK_THROWS_AS(GaussianBlur(4, 4, 0.0), std::invalid_argument);
}

TEST_CASE("blur of a centered impulse reproduces the tabulated kernel") {
  const double sigma = 1.5;
  Image impulse(33, 33);
  impulse(16, 16) = 1.0;
  const Grid out = GaussianBlur(33, 33, sigma).apply(impulse);
  // independent tabulation of the truncated, renormalized 2-D Gaussian
  const int radius = 6;
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i)
    for (int j = -radius; j <= radius; ++j) total += std::exp(-(i * i + j * j) / (2 * sigma * sigma));
  for (int i = -16; i <= 16; ++i) {
    for (int j = -16; j <= 16; ++j) {
      const double expect = (std::abs(i) <= radius && std::abs(j) <= radius)
                                ? std::exp(-(i * i + j * j) / (2 * sigma * sigma)) / total
                                : 0.0;
      CHECK(out(16 + i, 16 + j) == doctest::Approx(expect).epsilon(1e-13));
    }
  }
}

TEST_CASE("blur is self-adjoint and its adjoint matches") {
  RandomSource rng(21);
  const GaussianBlur blur(16, 16, 1.5);
  for (int t = 0; t < 20; ++t) {
    const Image u = rng.normal_grid(16, 16);
    const Image v = rng.normal_grid(16, 16);
    CHECK(rel_gap(inner(blur.apply(u), v), inner(u, blur.apply(v))) <= 1e-10);
  }
  check_adjoint(blur, rng, 20);
  // radius larger than the grid exercises repeated reflection
  check_adjoint(GaussianBlur(5, 7, 3.0), rng, 5);
}

TEST_CASE("Radon geometry and adjoint") {
  const ParallelRadon full_size(128, 60);
  CHECK(full_size.detector_count() == 182);
  CHECK(full_size.range_rows() * full_size.range_cols() == 10920);
  CHECK(full_size.angles_deg().front() == 1.0);
  CHECK(full_size.angles_deg().back() == doctest::Approx(180.0));

  const ParallelRadon radon(32, 60);
  const Grid zero = radon.apply(Image(32, 32));
  for (double v : zero.values()) CHECK(v == 0.0);

  RandomSource rng(5);
  check_adjoint(radon, rng, 20);
  check_adjoint(ParallelRadon(17, 9, RadonSupport::inscribed_disk), rng, 5);

  const Grid pos = radon.apply(rng.uniform_grid(32, 32));
  for (double v : pos.values()) CHECK(v >= 0.0);
}

TEST_CASE("Radon disk support ignores the corners") {
  const ParallelRadon disk(24, 12, RadonSupport::inscribed_disk);
  Image corner(24, 24);
  corner(0, 0) = 1.0;
  CHECK_FALSE(disk.in_support(0, 0));
  CHECK(norm(disk.apply(corner)) == 0.0);
  const ParallelRadon full(24, 12);
  CHECK(norm(full.apply(corner)) > 0.0);
}

TEST_CASE("linear models are linear in the direction") {
  RandomSource rng(77);
  const GaussianBlur blur(12, 12, 1.0);
  const ParallelRadon radon(12, 10);
  const PhaseRetrievalModel pr{ParallelRadon(12, 10)};
  for (const ForwardModel* m : {static_cast<const ForwardModel*>(&blur), static_cast<const ForwardModel*>(&radon),
                                static_cast<const ForwardModel*>(&pr)}) {
    const Image u = rng.normal_grid(12, 12);
    const Image q1 = rng.normal_grid(12, 12);
    const Image q2 = rng.normal_grid(12, 12);
    const double a = 0.7, b = -1.3;
    const Grid lhs = m->derivative_apply(u, a * q1 + b * q2);
    const Grid rhs = a * m->derivative_apply(u, q1) + b * m->derivative_apply(u, q2);
    CHECK(norm(lhs - rhs) <= 1e-12 * std::max(1.0, norm(lhs)));
    if (m->is_linear()) CHECK(norm(m->apply(q1) - m->derivative_apply(u, q1)) == 0.0);
  }
}

TEST_CASE("phase retrieval forward model") {
  const PhaseRetrievalModel pr{ParallelRadon(16, 20)};
  RandomSource rng(9);
  const Image u = rng.normal_grid(16, 16);
  const Grid y = pr.apply(u);
  for (double v : y.values()) CHECK(v >= 0.0);
  CHECK(pr.apply(-1.0 * u) == y);
  const Grid s = pr.radon().apply(u);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] - s[i] * s[i]) <= 1e-14 * std::max(1.0, y[i]));

  const Image zero(16, 16);
  CHECK(norm(pr.apply(zero)) == 0.0);
  CHECK(norm(pr.derivative_apply(zero, u)) == 0.0);
  CHECK(norm(pr.adjoint_apply(zero, rng.normal_grid(pr.range_rows(), pr.range_cols()))) == 0.0);

  check_adjoint(pr, rng, 20);
}

TEST_CASE("phase retrieval Jacobian passes the finite-difference ratio test") {
  const PhaseRetrievalModel pr{ParallelRadon(16, 20)};
  RandomSource rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const Image u = rng.normal_grid(16, 16);
    const Image q = rng.normal_grid(16, 16);
    const Grid base = pr.apply(u);
    const Grid lin = pr.derivative_apply(u, q);
    auto remainder = [&](double t) {
      Grid r = pr.apply(u + t * q) - base;
      r.axpy(-t, lin);
      return norm(r);
    };
    const double ratio = remainder(1e-3) / remainder(1e-4);
    CHECK(ratio >= 80.0);
    CHECK(ratio <= 120.0);
  }
}

TEST_CASE("norm bound estimates") {
  RandomSource rng(1);
  const auto identity = GaussianBlur::identity(10, 10);
  CHECK(estimate_norm_bound(identity, Image(10, 10), 5, rng) == doctest::Approx(1.0).epsilon(1e-6));

  for (double sigma : {0.5, 1.5, 4.0}) {
    const GaussianBlur blur(24, 24, sigma);
    CHECK(estimate_norm_bound(blur, Image(24, 24), 50, rng) <= 1.0 + 1e-6);
  }

  // dense oracle: largest singular value from the eigenvalues of A^T A
  const ParallelRadon radon(32, 60);
  const std::size_t n = 32 * 32;
  Eigen::MatrixXd a(radon.range_rows() * radon.range_cols(), n);
  for (std::size_t j = 0; j < n; ++j) {
    Image e(32, 32);
    e[j] = 1.0;
    const Grid col = radon.apply(e);
    for (std::size_t i = 0; i < col.size(); ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  const Eigen::MatrixXd ata = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ata, Eigen::EigenvaluesOnly);
  const double sigma_max = std::sqrt(eig.eigenvalues().maxCoeff());
  const double est = estimate_norm_bound(radon, Image(32, 32), 100, rng);
  CHECK(std::abs(est - sigma_max) <= 0.01 * sigma_max);

  RandomSource r1(4), r2(4);
  const double few = estimate_norm_bound(radon, Image(32, 32), 3, r1);
  const double many = estimate_norm_bound(radon, Image(32, 32), 30, r2);
  CHECK(many >= few);
  CHECK_THROWS_AS(estimate_norm_bound(radon, Image(32, 32), 0, r1), std::invalid_argument);
}

TEST_CASE("Wiener deconvolution limits") {
  RandomSource rng(2);
  const GaussianBlur blur(32, 24, 1.0);
  const Image u = rng.uniform_grid(32, 24);
  const Grid v = blur.apply(u);
  const Image back = wiener_deconvolve(blur, v, 0.0);
  CHECK(norm(back - u) <= 1e-8 * norm(u));

  const Image damped = wiener_deconvolve(blur, v, 1e12);
  CHECK(norm(damped) <= 1e-9 * norm(u));
  CHECK_THROWS_AS(wiener_deconvolve(blur, v, -1.0), std::invalid_argument);
}

TEST_CASE("Wiener with the default noise-to-signal ratio improves on the blurred data") {
  const Image truth = shepp_logan_supersampled(256, 2);
  const GaussianBlur blur(256, 256, 1.5);
  RandomSource rng(31);
  for (double delta : {0.005, 0.0005}) {
    const auto data = add_noise(blur.apply(truth), delta, rng);
    const double nsr = data.noise_level * data.noise_level / squared_norm(data.values);
    const double gain = psnr(truth, wiener_deconvolve(blur, data.values, nsr)) - psnr(truth, data.values);
    MESSAGE("delta " << delta << " Wiener gain " << gain << " dB");
    CHECK(gain > 0.0);
  }
}
