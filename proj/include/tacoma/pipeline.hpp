#pragma once

// Glue for the full scoring pipeline: masked multi-relationship feature
// extraction, class-aware sampling and the learning-curve experiment.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "tacoma/dataset.hpp"
#include "tacoma/error.hpp"
#include "tacoma/forest.hpp"
#include "tacoma/formats.hpp"
#include "tacoma/glcm.hpp"
#include "tacoma/mask.hpp"
#include "tacoma/raster.hpp"
#include "tacoma/split.hpp"
#include "tacoma/rng.hpp"

namespace tacoma {

// Concatenation of the masked GLCM entries, one block per mask in order.
inline std::vector<double> extract_features(const QuantizedImage& image, std::span<const FeatureMask> masks,
                                            bool normalize = false) {
  std::vector<double> out;
  for (const auto& mask : masks) {
    const auto fv = apply_mask(compute_glcm(image, mask.relationship), mask, normalize);
    out.insert(out.end(), fv.values.begin(), fv.values.end());
  }
  return out;
}

inline std::vector<BlockInfo> block_layout(std::span<const FeatureMask> masks) {
  std::vector<BlockInfo> blocks;
  std::size_t pos = 0;
  for (const auto& m : masks) {
    blocks.push_back({m.relationship.name(), pos, pos + m.size(), mask_identity(m)});
    pos += m.size();
  }
  return blocks;
}

inline FeatureFile extract_corpus(std::span<const GrayImage> images, std::span<const int> labels,
                                  std::span<const FeatureMask> masks, int levels, bool normalize = false) {
  if (images.size() != labels.size()) throw ArgumentError("image and label counts differ");
  for (const auto& m : masks) {
    if (m.levels != levels) throw ArgumentError("mask levels do not match the requested levels");
  }
  FeatureFile f;
  f.blocks = block_layout(masks);
  f.features.cols = f.blocks.empty() ? 0 : f.blocks.back().end;
  for (std::size_t i = 0; i < images.size(); ++i) {
    f.features.push_row(extract_features(quantize(images[i], levels), masks, normalize));
    f.labels.push_back(labels[i]);
  }
  return f;
}

inline std::vector<FeatureBlock> feature_blocks(const FeatureFile& f) {
  std::vector<FeatureBlock> out;
  for (const auto& b : f.blocks) out.push_back({b.begin, b.end});
  return out;
}

/// `count` distinct indices from `candidates` containing at least one index
/// of every label present (when count allows); the rest drawn uniformly.
inline std::vector<std::size_t> sample_covering(std::span<const int> labels, std::vector<std::size_t> candidates,
                                                std::size_t count, std::uint64_t seed) {
  if (count > candidates.size()) throw ArgumentError("sample larger than the candidate pool");
  Rng rng(seed);
  rng.shuffle(candidates);
  std::vector<std::size_t> chosen;
  std::vector<int> seen;
  for (auto i : candidates) {
    if (chosen.size() == count) break;
    if (std::find(seen.begin(), seen.end(), labels[i]) == seen.end()) {
      seen.push_back(labels[i]);
      chosen.push_back(i);
    }
  }
  for (auto i : candidates) {
    if (chosen.size() == count) break;
    if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

struct Holdout {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-class split; round(test_fraction * class size) of each class goes to test.
inline Holdout stratified_holdout(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("test fraction must be in (0, 1)");
  int classes = 0;
  for (int y : labels) classes = std::max(classes, y + 1);
  Rng rng(seed);
  Holdout h;
  for (int c = 0; c < classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(i);
    rng.shuffle(members);
    const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(members.size())));
    h.test.insert(h.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    h.train.insert(h.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(h.train.begin(), h.train.end());
  std::sort(h.test.begin(), h.test.end());
  return h;
}

struct CurvePoint {
  std::size_t size = 0;
  std::vector<double> errors;  // one per repeat
  double median = 0.0;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

/// Test error of forests trained on random class-covering subsets of
/// `train` for each size; repeat r of size s uses sub-seed (seed, s, r).
inline std::vector<CurvePoint> learning_curve(const Dataset& train, const Dataset& test,
                                              std::span<const std::size_t> sizes, std::size_t repeats,
                                              ForestParams params, std::uint64_t seed) {
  train.validate();
  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<CurvePoint> curve;
  for (auto size : sizes) {
    if (size < 1 || size > train.size()) throw ArgumentError("training size out of range");
    CurvePoint pt{size, {}, 0.0};
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto sub_seed = derive_seed(derive_seed(seed, size), r);
      const auto rows = sample_covering(train.labels, all, size, sub_seed);
      params.seed = derive_seed(sub_seed, 1);
      const auto forest = train_forest(train.select_rows(rows), params);
      pt.errors.push_back(error_rate(forest, test));
    }
    pt.median = median_of(pt.errors);
    curve.push_back(std::move(pt));
  }
  return curve;
}

}  // namespace tacoma
