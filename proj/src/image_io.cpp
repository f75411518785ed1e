#include "ddir/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace ddir {

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

unsigned char quantize(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(clamped * 255.0));
}

// Cursor over a PNM header: whitespace- and comment-separated decimal tokens.
class PnmReader {
 public:
  explicit PnmReader(const std::string& bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  void set_pos(std::size_t p) { pos_ = p; }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long number(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    if (pos_ >= bytes_.size()) throw ParseError(std::string("unexpected end of file reading ") + what, pos_);
    unsigned long value = 0;
    auto [ptr, ec] = std::from_chars(bytes_.data() + pos_, bytes_.data() + bytes_.size(), value);
    if (ec != std::errc()) throw ParseError(std::string("expected integer for ") + what, start);
    pos_ = static_cast<std::size_t>(ptr - bytes_.data());
    return value;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_csv(const Grid& g) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      if (c) out << ',';
      out << g(r, c);
    }
    out << '\n';
  }
  return out.str();
}

Grid parse_csv(const std::string& text) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t line_end = text.find('\n', pos);
    if (line_end == std::string::npos) line_end = text.size();
    std::size_t end = line_end;
    if (end > pos && text[end - 1] == '\r') --end;
    if (end == pos) {
      pos = line_end + 1;
      continue;
    }
    std::size_t count = 0;
    std::size_t field = pos;
    while (true) {
      std::size_t comma = text.find(',', field);
      if (comma == std::string::npos || comma > end) comma = end;
      std::size_t a = field;
      while (a < comma && text[a] == ' ') ++a;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(text.data() + a, text.data() + comma, v);
      if (ec != std::errc() || ptr == text.data() + a) throw ParseError("invalid number in CSV", a);
      if (!std::isfinite(v)) throw ParseError("non-finite value in CSV", a);
      values.push_back(v);
      ++count;
      if (comma == end) break;
      field = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError("CSV row " + std::to_string(rows) + " has " + std::to_string(count) +
                           " fields, expected " + std::to_string(cols),
                       pos);
    }
    ++rows;
    pos = line_end + 1;
  }
  if (rows == 0) throw ParseError("empty CSV", 0);
  return Grid(rows, cols, std::move(values));
}

void save_csv(const Grid& g, const std::filesystem::path& path) { write_file(path, to_csv(g)); }

Grid load_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

void save_pgm(const Grid& g, const std::filesystem::path& path, GraymapEncoding encoding) {
  std::string out = (encoding == GraymapEncoding::binary_p5 ? "P5\n" : "P2\n");
  out += std::to_string(g.cols()) + " " + std::to_string(g.rows()) + "\n255\n";
  if (encoding == GraymapEncoding::binary_p5) {
    for (double v : g.values()) out.push_back(static_cast<char>(quantize(v)));
  } else {
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) {
        if (c) out.push_back(' ');
        out += std::to_string(quantize(g(r, c)));
      }
      out.push_back('\n');
    }
  }
  write_file(path, out);
}

void save_pgm_normalized(const Grid& g, const std::filesystem::path& path) {
  Grid scaled = g;
  if (!g.empty()) {
    const auto [lo, hi] = std::minmax_element(g.values().begin(), g.values().end());
    const double lo_v = *lo;
    const double span = *hi - *lo;
    for (double& v : scaled.values()) v = span > 0.0 ? (v - lo_v) / span : 0.0;
  }
  save_pgm(scaled, path, GraymapEncoding::binary_p5);
}

Grid parse_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw ParseError("not a P2/P5 graymap", 0);
  }
  const bool binary = bytes[1] == '5';
  PnmReader reader(bytes);
  reader.set_pos(2);
  const auto width = reader.number("width");
  const auto height = reader.number("height");
  const auto maxval = reader.number("maxval");
  if (width == 0 || height == 0) throw ParseError("zero image dimension", reader.pos());
  if (maxval == 0 || maxval > 255) throw ParseError("unsupported maxval " + std::to_string(maxval), reader.pos());
  Grid g(height, width);
  if (binary) {
    // exactly one whitespace byte separates the header from the raster
    std::size_t data = reader.pos() + 1;
    const std::size_t need = static_cast<std::size_t>(width) * height;
    if (bytes.size() < data + need) {
      throw ParseError("truncated raster: expected " + std::to_string(need) + " bytes", bytes.size());
    }
    for (std::size_t i = 0; i < need; ++i) {
      g[i] = static_cast<unsigned char>(bytes[data + i]) / static_cast<double>(maxval);
    }
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto v = reader.number("pixel");
      if (v > maxval) throw ParseError("pixel exceeds maxval", reader.pos());
      g[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return g;
}

Grid load_pgm(const std::filesystem::path& path) { return parse_pgm(read_file(path)); }

Grid load_image(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return load_csv(path);
  if (ext == ".pgm" || ext == ".pnm") return load_pgm(path);
  throw IoError("unsupported image extension '" + ext + "'");
}

void save_image(const Grid& g, const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return save_csv(g, path);
  if (ext == ".pgm" || ext == ".pnm") return save_pgm(g, path);
  throw IoError("unsupported image extension '" + ext + "'");
}

}  // namespace ddir
