#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ddir/phantoms.hpp"

using namespace ddir;

namespace {

bool in_unit_range(const Image& im) {
  return std::all_of(im.values().begin(), im.values().end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

}  // namespace

TEST_CASE("Shepp-Logan phantom") {
  const Image p = shepp_logan(256);
  CHECK(p.rows() == 256);
  CHECK(p(0, 0) == 0.0);
  CHECK(p(255, 255) == 0.0);
  CHECK(in_unit_range(p));
  double mass = 0.0;
  for (double v : p.values()) mass += v;
  CHECK(mass > 0.0);
  // skull rim 1.0 and brain 1.0 - 0.8
  CHECK(p(128, 128) == doctest::Approx(0.2));
  CHECK(p(128, 41) == doctest::Approx(1.0));
  CHECK(p(128, 3) == 0.0);
  CHECK(shepp_logan(64) == shepp_logan(64));
  CHECK_THROWS_AS(shepp_logan(8), std::invalid_argument);
}

TEST_CASE("Shepp-Logan is consistent across resolutions") {
  const Image coarse = shepp_logan(64);
  const Image fine = shepp_logan(128);
  double mad = 0.0;
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t c = 0; c < 64; ++c) {
      const double avg =
          0.25 * (fine(2 * r, 2 * c) + fine(2 * r + 1, 2 * c) + fine(2 * r, 2 * c + 1) + fine(2 * r + 1, 2 * c + 1));
      mad += std::abs(avg - coarse(r, c));
    }
  }
  mad /= 64.0 * 64.0;
  CHECK(mad < 0.05);
}

TEST_CASE("binary blobs") {
  const Image a = binary_blobs(128, 7, 0.5);
  CHECK(a == binary_blobs(128, 7, 0.5));
  CHECK_FALSE(a == binary_blobs(128, 8, 0.5));
  double fg = 0.0;
  for (double v : a.values()) {
    CHECK((v == 0.0 || v == 1.0));
    fg += v;
  }
  CHECK(std::abs(fg / a.size() - 0.5) <= 0.02);
  const Image sparse = binary_blobs(64, 3, 0.2);
  double fs = 0.0;
  for (double v : sparse.values()) fs += v;
  CHECK(std::abs(fs / sparse.size() - 0.2) <= 0.02);
  CHECK_THROWS_AS(binary_blobs(64, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(binary_blobs(8, 1, 0.5), std::invalid_argument);
}

TEST_CASE("phantom specs") {
  for (const char* name : {"shepp-logan", "binary-blobs", "flat", "impulse"}) {
    CHECK(to_string(parse_phantom_kind(name)) == name);
  }
  CHECK_THROWS_AS(parse_phantom_kind("coins"), std::invalid_argument);

  PhantomSpec spec;
  spec.side = 32;
  for (PhantomKind kind : {PhantomKind::shepp_logan, PhantomKind::binary_blobs, PhantomKind::flat, PhantomKind::impulse}) {
    spec.kind = kind;
    const Image im = make_phantom(spec);
    CHECK(im.rows() == 32);
    CHECK(in_unit_range(im));
    CHECK(im == make_phantom(spec));
  }
  spec.kind = PhantomKind::flat;
  spec.level = 0.3;
  CHECK(make_phantom(spec) == Image(32, 32, 0.3));
}
