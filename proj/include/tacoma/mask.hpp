#pragma once

// Feature mask construction from representative patches.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tacoma/error.hpp"
#include "tacoma/glcm.hpp"
#include "tacoma/raster.hpp"

namespace tacoma {

using IndexSet = std::vector<std::pair<int, int>>;

// Lower median over all entries, zeros included.
inline double entry_median(const Glcm& matrix) {
  if (matrix.counts.empty()) throw ArgumentError("empty matrix");
  std::vector<std::int64_t> v = matrix.counts;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return static_cast<double>(*mid);
}

// Entries strictly above the patch's own median, row-major.
inline IndexSet patch_index_set(const Glcm& patch_glcm) {
  const double tau = entry_median(patch_glcm);
  IndexSet out;
  for (int a = 1; a <= patch_glcm.levels; ++a) {
    for (int b = 1; b <= patch_glcm.levels; ++b) {
      if (static_cast<double>(patch_glcm.at(a, b)) > tau) out.emplace_back(a, b);
    }
  }
  return out;
}

inline FeatureMask build_mask(std::span<const QuantizedImage> patches, const SpatialRelationship& rel) {
  if (patches.empty()) throw ArgumentError("at least one patch is required");
  const int levels = patches.front().levels;
  std::set<std::pair<int, int>> merged;
  for (const auto& patch : patches) {
    if (patch.levels != levels) throw ArgumentError("patches quantized to different level counts");
    for (const auto& idx : patch_index_set(compute_glcm(patch, rel))) merged.insert(idx);
  }
  FeatureMask mask;
  mask.levels = levels;
  mask.relationship = rel;
  mask.indices.assign(merged.begin(), merged.end());
  mask.patch_count = static_cast<int>(patches.size());
  return mask;
}

inline std::string mask_to_text(const FeatureMask& mask) {
  nlohmann::ordered_json j;
  j["format"] = "tacoma-mask-v1";
  j["levels"] = mask.levels;
  j["relationship"] = mask.relationship.name();
  j["patch_count"] = mask.patch_count;
  auto idx = nlohmann::ordered_json::array();
  for (const auto& [a, b] : mask.indices) idx.push_back({a, b});
  j["indices"] = std::move(idx);
  return j.dump() + "\n";
}

inline FeatureMask mask_from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(std::string("mask is not valid JSON: ") + e.what(), e.byte);
  }
  try {
    if (j.at("format").get<std::string>() != "tacoma-mask-v1") throw DecodeError("unknown mask format", 0);
    FeatureMask mask;
    mask.levels = j.at("levels").get<int>();
    mask.relationship = SpatialRelationship::parse(j.at("relationship").get<std::string>());
    mask.patch_count = j.at("patch_count").get<int>();
    for (const auto& e : j.at("indices")) {
      const int a = e.at(0).get<int>();
      const int b = e.at(1).get<int>();
      if (a < 1 || b < 1 || a > mask.levels || b > mask.levels) throw DecodeError("mask index out of range", 0);
      mask.indices.emplace_back(a, b);
    }
    if (!std::is_sorted(mask.indices.begin(), mask.indices.end())) throw DecodeError("mask indices not sorted", 0);
    return mask;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("bad mask document: ") + e.what(), 0);
  }
}

// 64-bit FNV-1a of the canonical text, hex encoded.
inline std::string mask_identity(const FeatureMask& mask) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : mask_to_text(mask)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tacoma
