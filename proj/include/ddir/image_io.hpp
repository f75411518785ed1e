#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "ddir/grid.hpp"

namespace ddir {

/// Malformed input file. offset() is the byte position where parsing failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GraymapEncoding { ascii_p2, binary_p5 };

// CSV: one line per grid row, values separated by commas, written with
// max_digits10 so that reading back is bit-exact.
void save_csv(const Grid& g, const std::filesystem::path& path);
Grid load_csv(const std::filesystem::path& path);
std::string to_csv(const Grid& g);
Grid parse_csv(const std::string& text);

// Graymap: maxval 255, [0,1] mapped linearly onto 0..255 (values clamped).
void save_pgm(const Grid& g, const std::filesystem::path& path,
              GraymapEncoding encoding = GraymapEncoding::binary_p5);
/// Min-max normalizes before quantizing. For sinograms and other data that
/// are not in [0,1].
void save_pgm_normalized(const Grid& g, const std::filesystem::path& path);
Grid load_pgm(const std::filesystem::path& path);
Grid parse_pgm(const std::string& bytes);

/// Dispatches on extension: .csv, .pgm/.pnm.
Grid load_image(const std::filesystem::path& path);
void save_image(const Grid& g, const std::filesystem::path& path);

}  // namespace ddir
