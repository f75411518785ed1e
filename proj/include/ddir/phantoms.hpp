#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "ddir/grid.hpp"

namespace ddir {

enum class PhantomKind { shepp_logan, binary_blobs, flat, impulse };

struct PhantomSpec {
  PhantomKind kind = PhantomKind::shepp_logan;
  std::size_t side = 256;
  std::uint64_t seed = 0;
  double blob_fraction = 0.5;
  /// Value of the flat phantom.
  double level = 0.5;
};

PhantomKind parse_phantom_kind(const std::string& name);
std::string to_string(PhantomKind kind);

/// Ten-ellipse head phantom (modified intensities), rasterized by pixel
/// center membership and clipped to [0,1].
Image shepp_logan(std::size_t side);

/// Seeded white noise blurred with sigma = side / 16 and thresholded so that
/// round(blob_fraction * side^2) pixels are 1 and the rest 0.
Image binary_blobs(std::size_t side, std::uint64_t seed, double blob_fraction = 0.5);

Image make_phantom(const PhantomSpec& spec);

}  // namespace ddir
