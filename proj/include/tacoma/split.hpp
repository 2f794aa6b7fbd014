#pragma once

// Feature partitions for co-training: natural per-relationship blocks and
// random equal-size thinning.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "tacoma/error.hpp"
#include "tacoma/rng.hpp"

namespace tacoma {

enum class SplitScheme { Natural, Thinning };

struct FeatureSplit {
  std::vector<std::vector<std::size_t>> subsets;  // each sorted ascending
  SplitScheme scheme = SplitScheme::Natural;
  std::uint64_t seed = 0;

  std::size_t parts() const { return subsets.size(); }
};

// Half-open block [begin, end) of feature columns.
struct FeatureBlock {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Uniformly random partition of {0..p-1} into J slices whose sizes differ
/// by at most one (the first p mod J slices get the extra feature).
inline FeatureSplit thin_split(std::size_t p, std::size_t parts, std::uint64_t seed) {
  if (parts < 2 || parts > p) {
    throw ArgumentError("thinning needs 2 <= J <= p (J=" + std::to_string(parts) + ", p=" + std::to_string(p) + ")");
  }
  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm);
  FeatureSplit split;
  split.scheme = SplitScheme::Thinning;
  split.seed = seed;
  const std::size_t base = p / parts;
  const std::size_t extra = p % parts;
  std::size_t pos = 0;
  for (std::size_t j = 0; j < parts; ++j) {
    const std::size_t len = base + (j < extra ? 1 : 0);
    std::vector<std::size_t> slice(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                                   perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(slice.begin(), slice.end());
    split.subsets.push_back(std::move(slice));
    pos += len;
  }
  return split;
}

inline FeatureSplit natural_split(const std::vector<FeatureBlock>& blocks) {
  if (blocks.size() < 2) throw ArgumentError("a natural split needs at least two relationship blocks");
  std::vector<FeatureBlock> sorted = blocks;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.begin < b.begin; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].end <= sorted[i].begin) throw ArgumentError("empty feature block");
    if (i > 0 && sorted[i].begin < sorted[i - 1].end) throw ArgumentError("feature blocks overlap");
  }
  FeatureSplit split;
  split.scheme = SplitScheme::Natural;
  for (const auto& b : blocks) {
    std::vector<std::size_t> s(b.end - b.begin);
    std::iota(s.begin(), s.end(), b.begin);
    split.subsets.push_back(std::move(s));
  }
  return split;
}

// Two distinct slices drawn uniformly from the J parts, in draw order.
inline std::pair<std::size_t, std::size_t> pick_two(std::size_t parts, std::uint64_t seed) {
  if (parts < 2) throw ArgumentError("need at least two parts");
  if (parts == 2) return {0, 1};
  Rng rng(seed);
  const std::size_t first = rng.index(parts);
  std::size_t second = rng.index(parts - 1);
  if (second >= first) ++second;
  return {first, second};
}

}  // namespace tacoma
