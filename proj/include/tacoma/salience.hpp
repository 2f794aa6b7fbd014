#pragma once

// Back-projection of important GLCM entries onto the pixels that realize
// them, and white overlays of those pixels.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tacoma/error.hpp"
#include "tacoma/forest.hpp"
#include "tacoma/glcm.hpp"
#include "tacoma/raster.hpp"

namespace tacoma {

struct SalienceMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> flags;  // row-major, 1 = salient
  std::vector<std::pair<int, int>> source_features;
  std::size_t requested = 0;  // k asked for; differs from source_features.size() when clamped

  SalienceMap() = default;
  SalienceMap(int w, int h) : width(w), height(h), flags(static_cast<std::size_t>(w) * h, 0) {}

  bool flagged(int x, int y) const { return flags[static_cast<std::size_t>(y) * width + x] != 0; }

  std::size_t count() const { return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), 1)); }

  // Flagged (x, y) positions, 0-based, sorted by y then x.
  std::vector<std::pair<int, int>> positions() const {
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (flagged(x, y)) out.emplace_back(x, y);
    return out;
  }
};

/// Flags both endpoints of every pair (x, x + offset) with I(x) = a and
/// I(x + offset) = b, for each (a, b) in `features`.
inline SalienceMap salient_pixels(const QuantizedImage& image, const SpatialRelationship& rel,
                                  const std::vector<std::pair<int, int>>& features) {
  SalienceMap map(image.width, image.height);
  map.source_features = features;
  map.requested = features.size();
  if (features.empty()) return map;
  const std::size_t n = static_cast<std::size_t>(image.levels);
  std::vector<std::uint8_t> wanted(n * n, 0);
  for (const auto& [a, b] : features) {
    if (a < 1 || b < 1 || a > image.levels || b > image.levels) throw ArgumentError("feature index out of range");
    wanted[static_cast<std::size_t>(a - 1) * n + static_cast<std::size_t>(b - 1)] = 1;
  }
  const Offset off = offset_of(rel);
  const int x0 = std::max(0, -off.dx);
  const int x1 = std::min(image.width, image.width - off.dx);
  const int y0 = std::max(0, -off.dy);
  const int y1 = std::min(image.height, image.height - off.dy);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const int a = image.at(x, y);
      const int b = image.at(x + off.dx, y + off.dy);
      if (wanted[static_cast<std::size_t>(a - 1) * n + static_cast<std::size_t>(b - 1)]) {
        map.flags[static_cast<std::size_t>(y) * image.width + x] = 1;
        map.flags[static_cast<std::size_t>(y + off.dy) * image.width + (x + off.dx)] = 1;
      }
    }
  }
  return map;
}

/// The k most important model features, translated back to GLCM entries
/// through the mask ordering. `feature_offset` locates the mask's block when
/// the model was trained on several concatenated relationships.
inline std::vector<std::pair<int, int>> top_features(const Forest& forest, const FeatureMask& mask, std::size_t k,
                                                     std::size_t feature_offset = 0) {
  if (k < 1) throw ArgumentError("k must be at least 1");
  if (feature_offset + mask.size() > forest.features) throw ArgumentError("mask does not fit the model's features");
  std::vector<std::pair<int, int>> out;
  for (const auto& [j, imp] : importance_ranking(forest)) {
    if (out.size() >= k) break;
    if (j < feature_offset || j >= feature_offset + mask.size()) continue;
    out.push_back(mask.indices[j - feature_offset]);
  }
  return out;
}

// k larger than the mask is clamped; `requested` keeps the original k.
inline SalienceMap top_salient(const QuantizedImage& image, const SpatialRelationship& rel, const Forest& forest,
                               const FeatureMask& mask, std::size_t k, std::size_t feature_offset = 0) {
  auto map = salient_pixels(image, rel, top_features(forest, mask, k, feature_offset));
  map.requested = k;
  return map;
}

inline GrayImage render_overlay(const GrayImage& image, const SalienceMap& map) {
  if (image.width != map.width || image.height != map.height) throw ArgumentError("overlay dimensions do not match");
  GrayImage out = image;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    if (map.flags[i]) out.pixels[i] = 255;
  }
  return out;
}

// One "x y" line per flagged pixel.
inline std::string coordinates_text(const SalienceMap& map) {
  std::ostringstream os;
  for (const auto& [x, y] : map.positions()) os << x << ' ' << y << '\n';
  return os.str();
}

}  // namespace tacoma
