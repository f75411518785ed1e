#include "ddir/phantoms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ddir/operators.hpp"

namespace ddir {

PhantomKind parse_phantom_kind(const std::string& name) {
  if (name == "shepp-logan" || name == "shepp_logan") return PhantomKind::shepp_logan;
  if (name == "binary-blobs" || name == "binary_blobs") return PhantomKind::binary_blobs;
  if (name == "flat") return PhantomKind::flat;
  if (name == "impulse") return PhantomKind::impulse;
  throw std::invalid_argument("unknown phantom '" + name + "'");
}

std::string to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::shepp_logan: return "shepp-logan";
    case PhantomKind::binary_blobs: return "binary-blobs";
    case PhantomKind::flat: return "flat";
    case PhantomKind::impulse: return "impulse";
  }
  return "unknown";
}

namespace {

struct Ellipse {
  double intensity, a, b, x0, y0, phi_deg;
};

// Toft's modified Shepp-Logan table.
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

}  // namespace

Image shepp_logan(std::size_t side) {
  if (side < 16) throw std::invalid_argument("shepp_logan: side must be at least 16");
  Image img(side, side);
  const double n = static_cast<double>(side);
  for (std::size_t r = 0; r < side; ++r) {
    const double y = 1.0 - (2.0 * static_cast<double>(r) + 1.0) / n;
    for (std::size_t c = 0; c < side; ++c) {
      const double x = (2.0 * static_cast<double>(c) + 1.0) / n - 1.0;
      double v = 0.0;
      for (const auto& e : kSheppLogan) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double dx = x - e.x0;
        const double dy = y - e.y0;
        const double xr = dx * std::cos(phi) + dy * std::sin(phi);
        const double yr = -dx * std::sin(phi) + dy * std::cos(phi);
        if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) v += e.intensity;
      }
      img(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

Image binary_blobs(std::size_t side, std::uint64_t seed, double blob_fraction) {
  if (side < 16) throw std::invalid_argument("binary_blobs: side must be at least 16");
  if (!(blob_fraction > 0.0 && blob_fraction < 1.0)) {
    throw std::invalid_argument("binary_blobs: blob_fraction must lie in (0, 1)");
  }
  RandomSource rng(seed);
  const Image noise = rng.normal_grid(side, side);
  const GaussianBlur smooth(side, side, static_cast<double>(side) / 16.0);
  const Grid field = smooth.apply(noise);

  std::vector<std::size_t> order(field.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // ties broken by index so the foreground count is exact
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return field[a] > field[b] || (field[a] == field[b] && a < b);
  });
  const auto count = static_cast<std::size_t>(std::llround(blob_fraction * static_cast<double>(field.size())));
  Image out(side, side);
  for (std::size_t i = 0; i < count; ++i) out[order[i]] = 1.0;
  return out;
}

Image make_phantom(const PhantomSpec& spec) {
  switch (spec.kind) {
    case PhantomKind::shepp_logan: return shepp_logan(spec.side);
    case PhantomKind::binary_blobs: return binary_blobs(spec.side, spec.seed, spec.blob_fraction);
    case PhantomKind::flat: return Image(spec.side, spec.side, std::clamp(spec.level, 0.0, 1.0));
    case PhantomKind::impulse: {
      Image img(spec.side, spec.side);
      img(spec.side / 2, spec.side / 2) = 1.0;
      return img;
    }
  }
  throw std::invalid_argument("make_phantom: unknown kind");
}

}  // namespace ddir
