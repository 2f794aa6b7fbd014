#pragma once

// Grayscale images, binary PGM (P5) codec and gray-level quantization.

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "tacoma/error.hpp"

namespace tacoma {

inline constexpr int kInputLevels = 256;

// 8-bit grayscale raster, row-major, values in [0, 255].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

// Raster of gray levels in [1, levels].
struct QuantizedImage {
  int width = 0;
  int height = 0;
  int levels = 0;
  std::vector<std::uint16_t> pixels;

  QuantizedImage() = default;
  QuantizedImage(int w, int h, int n_levels, std::uint16_t fill = 1)
      : width(w), height(h), levels(n_levels), pixels(static_cast<std::size_t>(w) * h, fill) {}

  int at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  // Builds from explicit rows of levels; used for hand-made fixtures.
  static QuantizedImage from_rows(const std::vector<std::vector<int>>& rows, int n_levels) {
    if (rows.empty() || rows.front().empty()) throw ArgumentError("empty image");
    QuantizedImage im(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), n_levels);
    std::size_t k = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != im.width) throw ArgumentError("ragged rows");
      for (int v : row) {
        if (v < 1 || v > n_levels) throw ArgumentError("gray level out of range");
        im.pixels[k++] = static_cast<std::uint16_t>(v);
      }
    }
    return im;
  }

  bool operator==(const QuantizedImage&) const = default;
};

namespace detail {

inline std::size_t skip_pgm_space(std::span<const std::uint8_t> bytes, std::size_t pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  return pos;
}

inline long read_pgm_number(std::span<const std::uint8_t> bytes, std::size_t& pos, const char* field) {
  pos = skip_pgm_space(bytes, pos);
  const std::size_t start = pos;
  long value = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1'000'000'000L) throw DecodeError(std::string("oversized ") + field, start);
    ++pos;
  }
  if (pos == start) throw DecodeError(std::string("expected ") + field, start);
  return value;
}

}  // namespace detail

/// Decodes a binary PGM stream. Comments in the header are tolerated;
/// maxval must be at most 255 and pixel values are kept as stored.
inline GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw DecodeError("unsupported magic", 0);
  }
  std::size_t pos = 2;
  if (pos >= bytes.size() || !(std::isspace(bytes[pos]) || bytes[pos] == '#')) {
    throw DecodeError("unsupported magic", 0);
  }
  const long width = detail::read_pgm_number(bytes, pos, "width");
  const long height = detail::read_pgm_number(bytes, pos, "height");
  const std::size_t maxval_pos = detail::skip_pgm_space(bytes, pos);
  const long maxval = detail::read_pgm_number(bytes, pos, "maxval");
  if (width <= 0 || height <= 0) throw DecodeError("non-positive dimensions", pos);
  if (maxval <= 0 || maxval > 255) throw DecodeError("maxval must be in [1, 255]", maxval_pos);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw DecodeError("missing whitespace before payload", pos);
  }
  ++pos;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < count) throw DecodeError("truncated pixel payload", bytes.size());
  GrayImage im;
  im.width = static_cast<int>(width);
  im.height = static_cast<int>(height);
  im.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                   bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
  return im;
}

// Canonical form: "P5\n<w> <h>\n255\n" followed by the raw payload.
inline std::vector<std::uint8_t> write_pgm(const GrayImage& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline GrayImage load_pgm(const std::string& path) { return read_pgm(read_file_bytes(path)); }

inline void save_pgm(const std::string& path, const GrayImage& image) {
  write_file_bytes(path, write_pgm(image));
}

// Linear map of [0, 255] onto [1, levels]: floor(v * levels / 256) + 1.
inline int quantize_level(int value, int levels) { return value * levels / kInputLevels + 1; }

inline QuantizedImage quantize(const GrayImage& image, int levels) {
  if (levels < 2 || levels > kInputLevels) {
    throw ArgumentError("levels must be in [2, 256], got " + std::to_string(levels));
  }
  QuantizedImage out(image.width, image.height, levels);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    out.pixels[i] = static_cast<std::uint16_t>(quantize_level(image.pixels[i], levels));
  }
  return out;
}

}  // namespace tacoma
