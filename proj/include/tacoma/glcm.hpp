#pragma once

// Spatial relationships, directed gray-level co-occurrence matrices and
// masked feature vectors.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tacoma/error.hpp"
#include "tacoma/raster.hpp"

namespace tacoma {

enum class Direction { NE, SE, NW, SW, S, N, E, W };

inline constexpr std::array<Direction, 8> kAllDirections = {
    Direction::NE, Direction::SE, Direction::NW, Direction::SW,
    Direction::S,  Direction::N,  Direction::E,  Direction::W};

struct Offset {
  int dx = 0;  // columns, positive to the right
  int dy = 0;  // rows, positive downward
  bool operator==(const Offset&) const = default;
};

inline Offset unit_offset(Direction d) {
  switch (d) {
    case Direction::E: return {1, 0};
    case Direction::W: return {-1, 0};
    case Direction::S: return {0, 1};
    case Direction::N: return {0, -1};
    case Direction::NE: return {1, -1};
    case Direction::SE: return {1, 1};
    case Direction::NW: return {-1, -1};
    case Direction::SW: return {-1, 1};
  }
  return {0, 0};
}

inline Direction opposite(Direction d) {
  switch (d) {
    case Direction::E: return Direction::W;
    case Direction::W: return Direction::E;
    case Direction::S: return Direction::N;
    case Direction::N: return Direction::S;
    case Direction::NE: return Direction::SW;
    case Direction::SW: return Direction::NE;
    case Direction::SE: return Direction::NW;
    case Direction::NW: return Direction::SE;
  }
  return d;
}

inline std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::NE: return "ne";
    case Direction::SE: return "se";
    case Direction::NW: return "nw";
    case Direction::SW: return "sw";
    case Direction::S: return "s";
    case Direction::N: return "n";
    case Direction::E: return "e";
    case Direction::W: return "w";
  }
  return "?";
}

struct SpatialRelationship {
  Direction direction = Direction::E;
  int distance = 1;

  bool operator==(const SpatialRelationship&) const = default;

  // Compass form: direction letters then distance, e.g. "ne3".
  std::string name() const { return std::string(direction_name(direction)) + std::to_string(distance); }

  static SpatialRelationship parse(std::string_view text) {
    std::size_t split = 0;
    while (split < text.size() && std::isalpha(static_cast<unsigned char>(text[split]))) ++split;
    std::string letters;
    for (char c : text.substr(0, split)) letters += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto digits = text.substr(split);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw ArgumentError("bad relationship '" + std::string(text) + "'");
    }
    const int d = std::atoi(std::string(digits).c_str());
    for (Direction dir : kAllDirections) {
      if (direction_name(dir) == letters && d >= 1) return {dir, d};
    }
    throw ArgumentError("bad relationship '" + std::string(text) + "'");
  }
};

inline Offset offset_of(const SpatialRelationship& rel) {
  const Offset u = unit_offset(rel.direction);
  return {u.dx * rel.distance, u.dy * rel.distance};
}

inline std::vector<SpatialRelationship> parse_relationships(std::string_view list) {
  std::vector<SpatialRelationship> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    out.push_back(SpatialRelationship::parse(list.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

/// Directed co-occurrence counts. Entry (a, b), with 1-based gray levels,
/// counts pixel pairs (p, p + offset) where I(p) = a and I(p + offset) = b.
struct Glcm {
  int levels = 0;
  SpatialRelationship relationship;
  std::vector<std::int64_t> counts;  // row-major, levels x levels

  Glcm() = default;
  Glcm(int n_levels, SpatialRelationship rel)
      : levels(n_levels), relationship(rel), counts(static_cast<std::size_t>(n_levels) * n_levels, 0) {}

  std::int64_t at(int a, int b) const { return counts[index(a, b)]; }
  std::int64_t& at(int a, int b) { return counts[index(a, b)]; }

  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(a - 1) * static_cast<std::size_t>(levels) + static_cast<std::size_t>(b - 1);
  }

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }

  Glcm transposed() const {
    Glcm t(levels, relationship);
    for (int a = 1; a <= levels; ++a)
      for (int b = 1; b <= levels; ++b) t.at(b, a) = at(a, b);
    return t;
  }

  bool operator==(const Glcm&) const = default;
};

// Number of in-bounds pairs for an image of the given size.
inline std::int64_t pair_count(int width, int height, Offset off) {
  const std::int64_t w = width - std::abs(off.dx);
  const std::int64_t h = height - std::abs(off.dy);
  return (w > 0 && h > 0) ? w * h : 0;
}

inline Glcm compute_glcm(const QuantizedImage& image, const SpatialRelationship& rel) {
  Glcm g(image.levels, rel);
  const Offset off = offset_of(rel);
  // Source pixels whose partner stays in bounds form one rectangle.
  const int x0 = std::max(0, -off.dx);
  const int x1 = std::min(image.width, image.width - off.dx);
  const int y0 = std::max(0, -off.dy);
  const int y1 = std::min(image.height, image.height - off.dy);
  if (x0 >= x1 || y0 >= y1) return g;
  const std::size_t n = static_cast<std::size_t>(image.levels);
  const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(off.dy) * image.width + off.dx;
  for (int y = y0; y < y1; ++y) {
    const std::uint16_t* src = image.pixels.data() + static_cast<std::size_t>(y) * image.width;
    const std::uint16_t* dst = src + shift;
    for (int x = x0; x < x1; ++x) {
      ++g.counts[(src[x] - 1u) * n + (dst[x] - 1u)];
    }
  }
  return g;
}

// Surviving GLCM indices; one mask is shared by every training and scoring image.
struct FeatureMask {
  int levels = 0;
  SpatialRelationship relationship;
  std::vector<std::pair<int, int>> indices;  // sorted row-major, 1-based
  int patch_count = 0;

  std::size_t size() const { return indices.size(); }
  bool operator==(const FeatureMask&) const = default;
};

struct FeatureVector {
  std::vector<double> values;
  std::string provenance;
};

inline FeatureVector apply_mask(const Glcm& glcm, const FeatureMask& mask, bool normalize = false) {
  if (mask.levels != glcm.levels) {
    throw ArgumentError("mask has " + std::to_string(mask.levels) + " levels, GLCM has " +
                        std::to_string(glcm.levels));
  }
  FeatureVector fv;
  fv.provenance = mask.relationship.name();
  fv.values.reserve(mask.indices.size());
  const double scale = [&] {
    if (!normalize) return 1.0;
    const auto t = glcm.total();
    return t > 0 ? 1.0 / static_cast<double>(t) : 0.0;
  }();
  for (const auto& [a, b] : mask.indices) {
    fv.values.push_back(static_cast<double>(glcm.at(a, b)) * scale);
  }
  return fv;
}

}  // namespace tacoma
