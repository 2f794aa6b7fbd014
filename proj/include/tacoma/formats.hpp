#pragma once

// On-disk formats: manifest CSV, feature table CSV and the forest model
// document.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tacoma/dataset.hpp"
#include "tacoma/error.hpp"
#include "tacoma/forest.hpp"

namespace tacoma {

inline constexpr int kUnlabeled = -1;

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  out << text;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline double parse_number(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DecodeError("bad number '" + std::string(s) + "' on line " + std::to_string(line_no), 0);
  }
  return v;
}

inline int parse_label(std::string_view s, std::size_t line_no) {
  if (s == "?") return kUnlabeled;
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0) {
    throw DecodeError("bad label '" + std::string(s) + "' on line " + std::to_string(line_no), 0);
  }
  return v;
}

inline std::string format_label(int y) { return y == kUnlabeled ? "?" : std::to_string(y); }

// ---- manifest ---------------------------------------------------------------

struct ManifestRow {
  std::string path;
  int label = kUnlabeled;
};

struct Manifest {
  std::vector<ManifestRow> rows;
};

inline Manifest parse_manifest(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != "path,label") throw DecodeError("manifest must start with 'path,label'", 0);
  Manifest m;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto comma = lines[i].rfind(',');
    if (comma == std::string_view::npos) throw DecodeError("manifest line " + std::to_string(i + 1) + " lacks a label", 0);
    m.rows.push_back({std::string(lines[i].substr(0, comma)), parse_label(lines[i].substr(comma + 1), i + 1)});
  }
  return m;
}

inline std::string manifest_to_text(const Manifest& m) {
  std::string out = "path,label\n";
  for (const auto& r : m.rows) out += r.path + "," + format_label(r.label) + "\n";
  return out;
}

// Relative manifest paths resolve against the manifest's directory.
inline Manifest load_manifest(const std::string& path) {
  Manifest m = parse_manifest(read_text_file(path));
  const auto base = std::filesystem::path(path).parent_path();
  for (auto& r : m.rows) {
    if (std::filesystem::path(r.path).is_relative()) r.path = (base / r.path).string();
  }
  return m;
}

// ---- feature table ----------------------------------------------------------

struct BlockInfo {
  std::string relationship;  // compass name, e.g. "ne3"
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string mask_id;

  bool operator==(const BlockInfo&) const = default;
};

/// Feature rows plus labels; kUnlabeled marks "?" rows.
struct FeatureFile {
  std::vector<BlockInfo> blocks;
  FeatureTable features;
  std::vector<int> labels;

  int classes() const {
    int c = 0;
    for (int y : labels) c = std::max(c, y + 1);
    return c;
  }

  std::vector<std::size_t> labeled_rows() const {
    std::vector<std::size_t> r;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] != kUnlabeled) r.push_back(i);
    return r;
  }

  std::vector<std::size_t> unlabeled_rows() const {
    std::vector<std::size_t> r;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == kUnlabeled) r.push_back(i);
    return r;
  }

  // Labeled rows as a dataset; `classes` of 0 infers the count from the labels.
  Dataset labeled(int classes = 0) const {
    const auto rows = labeled_rows();
    Dataset d;
    d.features = features.select_rows(rows);
    for (auto i : rows) d.labels.push_back(labels[i]);
    d.classes = classes > 0 ? classes : this->classes();
    return d;
  }
};

inline std::string features_to_text(const FeatureFile& f) {
  std::string out = "tacoma-features-v1\nblocks";
  for (const auto& b : f.blocks) {
    out += "," + b.relationship + ":" + std::to_string(b.begin) + ":" + std::to_string(b.end) + ":" + b.mask_id;
  }
  out += "\n";
  for (std::size_t i = 0; i < f.features.rows; ++i) {
    out += format_label(f.labels[i]);
    for (double v : f.features.row(i)) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

inline FeatureFile parse_features(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.size() < 2 || lines[0] != "tacoma-features-v1") throw DecodeError("not a tacoma-features-v1 table", 0);
  FeatureFile f;
  const auto head = split_fields(lines[1]);
  if (head.empty() || head[0] != "blocks") throw DecodeError("second header line must list blocks", 0);
  std::size_t width = 0;
  for (std::size_t k = 1; k < head.size(); ++k) {
    const auto parts = split_fields(head[k], ':');
    if (parts.size() != 4) throw DecodeError("bad block descriptor '" + std::string(head[k]) + "'", 0);
    BlockInfo b{std::string(parts[0]), static_cast<std::size_t>(parse_number(parts[1], 2)),
                static_cast<std::size_t>(parse_number(parts[2], 2)), std::string(parts[3])};
    if (b.begin != width || b.end < b.begin) throw DecodeError("blocks must be contiguous", 0);
    width = b.end;
    f.blocks.push_back(b);
  }
  f.features.cols = width;
  std::vector<double> row;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i]);
    if (fields.size() != width + 1) {
      throw DecodeError("line " + std::to_string(i + 1) + " has " + std::to_string(fields.size() - 1) +
                            " features, expected " + std::to_string(width), 0);
    }
    f.labels.push_back(parse_label(fields[0], i + 1));
    row.clear();
    for (std::size_t k = 1; k < fields.size(); ++k) row.push_back(parse_number(fields[k], i + 1));
    f.features.values.insert(f.features.values.end(), row.begin(), row.end());
    ++f.features.rows;
  }
  return f;
}

// ---- forest model -----------------------------------------------------------

inline constexpr std::string_view kForestFormat = "tacoma-forest-v1";

inline std::string forest_to_text(const Forest& forest) {
  nlohmann::ordered_json j;
  j["version"] = kForestFormat;
  j["params"] = {{"n_trees", forest.params.n_trees}, {"mtry", forest.params.mtry}, {"seed", forest.params.seed}};
  j["classes"] = forest.classes;
  j["features"] = forest.features;
  j["importances"] = forest.importances;
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : forest.trees) {
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"n", n.samples}, {"h", n.histogram}});
      } else {
        nodes.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}, {"n", n.samples}});
      }
    }
    trees.push_back({{"in_bag", t.in_bag}, {"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

inline Forest forest_from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(std::string("model is not valid JSON: ") + e.what(), e.byte);
  }
  try {
    if (j.at("version").get<std::string>() != kForestFormat) throw DecodeError("unsupported model version", 0);
    Forest f;
    f.params.n_trees = j.at("params").at("n_trees").get<int>();
    f.params.mtry = j.at("params").at("mtry").get<int>();
    f.params.seed = j.at("params").at("seed").get<std::uint64_t>();
    f.classes = j.at("classes").get<int>();
    f.features = j.at("features").get<std::size_t>();
    f.importances = j.at("importances").get<std::vector<double>>();
    for (const auto& jt : j.at("trees")) {
      Tree t;
      t.in_bag = jt.at("in_bag").get<std::vector<std::uint32_t>>();
      for (const auto& jn : jt.at("nodes")) {
        TreeNode n;
        n.samples = jn.at("n").get<std::uint32_t>();
        if (jn.contains("h")) {
          n.histogram = jn.at("h").get<std::vector<std::uint32_t>>();
          if (n.histogram.size() != static_cast<std::size_t>(f.classes)) throw DecodeError("leaf histogram size", 0);
          n.label = argmax_low(std::span<const std::uint32_t>(n.histogram));
        } else {
          n.feature = jn.at("f").get<int>();
          n.threshold = jn.at("t").get<double>();
          n.left = jn.at("l").get<std::int32_t>();
          n.right = jn.at("r").get<std::int32_t>();
        }
        t.nodes.push_back(std::move(n));
      }
      const auto count = static_cast<std::int32_t>(t.nodes.size());
      for (const auto& n : t.nodes) {
        if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count ||
                             static_cast<std::size_t>(n.feature) >= f.features)) {
          throw DecodeError("corrupt tree node", 0);
        }
      }
      f.trees.push_back(std::move(t));
    }
    if (f.trees.size() != static_cast<std::size_t>(f.params.n_trees)) throw DecodeError("tree count mismatch", 0);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("bad model document: ") + e.what(), 0);
  }
}

}  // namespace tacoma
