#pragma once

// Synthetic stained-texture corpus: noisy light background with dark discs
// whose count, size and darkness grow with the class label. Class 0 carries
// no discs. Ground-truth disc masks are kept for salience checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tacoma/error.hpp"
#include "tacoma/raster.hpp"
#include "tacoma/rng.hpp"

namespace tacoma {

struct BlobClassParams {
  int min_blobs = 0;
  int max_blobs = 0;
  int min_radius = 6;
  int max_radius = 10;
  double darkness = 0.0;  // mean gray value inside a disc
};

struct SynthConfig {
  int width = 128;
  int height = 128;
  std::vector<int> per_class = {50, 50, 50, 50};
  std::vector<BlobClassParams> blobs = {
      {0, 0, 5, 9, 0.0},
      {1, 3, 5, 9, 135.0},
      {2, 4, 5, 9, 110.0},
      {2, 5, 5, 9, 85.0},
  };
  int background_low = 170;
  int background_high = 250;
  double blob_offset_sd = 6.0;  // per-disc darkness perturbation
  double pixel_sd = 8.0;        // per-pixel perturbation inside discs
  std::uint64_t seed = 0;

  int classes() const { return static_cast<int>(per_class.size()); }

  static SynthConfig with_counts(int per_class_count, std::uint64_t seed) {
    SynthConfig c;
    std::fill(c.per_class.begin(), c.per_class.end(), per_class_count);
    c.seed = seed;
    return c;
  }

  void validate() const {
    if (width < 4 || height < 4) throw ArgumentError("image too small");
    if (per_class.empty() || per_class.size() != blobs.size()) throw ArgumentError("class parameter count mismatch");
    if (blobs[0].max_blobs != 0) throw ArgumentError("class 0 must carry no blobs");
    if (background_low < 0 || background_high > 255 || background_low > background_high) {
      throw ArgumentError("bad background range");
    }
    for (std::size_t c = 0; c < blobs.size(); ++c) {
      const auto& b = blobs[c];
      if (per_class[c] < 0) throw ArgumentError("negative class count");
      if (b.min_blobs < 0 || b.min_blobs > b.max_blobs) throw ArgumentError("bad blob count range");
      if (b.min_radius < 1 || b.min_radius > b.max_radius) throw ArgumentError("bad radius range");
      if (2 * b.max_radius + 1 >= std::min(width, height)) throw ArgumentError("blob radius does not fit the image");
      if (c >= 2) {
        const auto& prev = blobs[c - 1];
        if (!(b.darkness < prev.darkness) || b.max_blobs < prev.max_blobs || b.min_blobs < prev.min_blobs) {
          throw ArgumentError("blob darkness and density must increase with class");
        }
      }
    }
  }
};

struct Blob {
  int cx = 0;
  int cy = 0;
  int radius = 0;
};

struct SynthCorpus {
  std::vector<GrayImage> images;
  std::vector<int> labels;
  std::vector<GrayImage> blob_masks;  // 255 inside a disc, 0 elsewhere
  std::vector<std::vector<Blob>> blobs;
};

inline SynthCorpus synth_corpus(const SynthConfig& config) {
  config.validate();
  SynthCorpus corpus;
  std::size_t index = 0;
  for (int c = 0; c < config.classes(); ++c) {
    const auto& params = config.blobs[static_cast<std::size_t>(c)];
    for (int k = 0; k < config.per_class[static_cast<std::size_t>(c)]; ++k, ++index) {
      Rng rng(derive_seed(config.seed, index));
      GrayImage im(config.width, config.height);
      GrayImage mask(config.width, config.height, 0);
      for (auto& px : im.pixels) {
        px = static_cast<std::uint8_t>(rng.integer(config.background_low, config.background_high));
      }
      std::vector<Blob> discs;
      const int count = params.max_blobs > 0 ? rng.integer(params.min_blobs, params.max_blobs) : 0;
      for (int b = 0; b < count; ++b) {
        Blob d;
        d.radius = rng.integer(params.min_radius, params.max_radius);
        d.cx = rng.integer(d.radius, config.width - d.radius - 1);
        d.cy = rng.integer(d.radius, config.height - d.radius - 1);
        const double level = params.darkness + config.blob_offset_sd * rng.normal();
        for (int y = d.cy - d.radius; y <= d.cy + d.radius; ++y) {
          for (int x = d.cx - d.radius; x <= d.cx + d.radius; ++x) {
            const int dx = x - d.cx;
            const int dy = y - d.cy;
            if (dx * dx + dy * dy > d.radius * d.radius) continue;
            const double v = std::round(level + config.pixel_sd * rng.normal());
            im.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            mask.at(x, y) = 255;
          }
        }
        discs.push_back(d);
      }
      corpus.images.push_back(std::move(im));
      corpus.labels.push_back(c);
      corpus.blob_masks.push_back(std::move(mask));
      corpus.blobs.push_back(std::move(discs));
    }
  }
  return corpus;
}

inline GrayImage crop(const GrayImage& image, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > image.width || y0 + h > image.height) {
    throw ArgumentError("crop outside the image");
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = image.at(x0 + x, y0 + y);
  return out;
}

// Square inscribed in a disc: every pixel lies inside the disc.
inline GrayImage blob_patch(const GrayImage& image, const Blob& blob) {
  const int half = std::max(1, static_cast<int>(std::floor(blob.radius / std::sqrt(2.0))));
  return crop(image, blob.cx - half, blob.cy - half, 2 * half + 1, 2 * half + 1);
}

/// Up to `count` patches, cycling through the stained classes 1..C-1 and
/// taking each chosen image's largest disc.
inline std::vector<GrayImage> representative_patches(const SynthCorpus& corpus, std::size_t count) {
  std::vector<GrayImage> out;
  int max_label = 0;
  for (int y : corpus.labels) max_label = std::max(max_label, y);
  if (max_label == 0) return out;
  std::vector<std::size_t> used(static_cast<std::size_t>(max_label) + 1, 0);
  for (int guard = 0; out.size() < count && guard < 4 * static_cast<int>(count) * max_label; ++guard) {
    const int c = 1 + guard % max_label;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < corpus.labels.size(); ++i) {
      if (corpus.labels[i] != c || corpus.blobs[i].empty()) continue;
      if (seen++ < used[static_cast<std::size_t>(c)]) continue;
      const auto& discs = corpus.blobs[i];
      const auto largest = std::max_element(discs.begin(), discs.end(),
                                            [](const Blob& a, const Blob& b) { return a.radius < b.radius; });
      out.push_back(blob_patch(corpus.images[i], *largest));
      ++used[static_cast<std::size_t>(c)];
      break;
    }
  }
  return out;
}

}  // namespace tacoma
