#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tacoma/error.hpp"

namespace tacoma {

// Dense row-major table of feature values.
struct FeatureTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  FeatureTable() = default;
  FeatureTable(std::size_t n_rows, std::size_t n_cols)
      : rows(n_rows), cols(n_cols), values(n_rows * n_cols, 0.0) {}

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }

  void push_row(std::span<const double> r) {
    if (rows == 0 && cols == 0) cols = r.size();
    if (r.size() != cols) throw ArgumentError("row has " + std::to_string(r.size()) + " values, expected " + std::to_string(cols));
    values.insert(values.end(), r.begin(), r.end());
    ++rows;
  }

  FeatureTable select_rows(std::span<const std::size_t> idx) const {
    FeatureTable out(idx.size(), cols);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto src = row(idx[k]);
      std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
  }

  FeatureTable select_columns(std::span<const std::size_t> idx) const {
    FeatureTable out(rows, idx.size());
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t k = 0; k < idx.size(); ++k) out.at(i, k) = at(i, idx[k]);
    }
    return out;
  }

  bool operator==(const FeatureTable&) const = default;
};

/// Labeled examples. Labels are class identifiers in [0, classes).
struct Dataset {
  FeatureTable features;
  std::vector<int> labels;
  int classes = 0;

  std::size_t size() const { return features.rows; }
  std::size_t dimension() const { return features.cols; }

  void validate() const {
    if (features.rows == 0) throw ArgumentError("dataset is empty");
    if (labels.size() != features.rows) throw ArgumentError("label count does not match row count");
    if (classes < 1) throw ArgumentError("class count must be positive");
    for (int y : labels) {
      if (y < 0 || y >= classes) throw ArgumentError("label " + std::to_string(y) + " out of range");
    }
  }

  Dataset select_rows(std::span<const std::size_t> idx) const {
    Dataset out;
    out.features = features.select_rows(idx);
    out.classes = classes;
    out.labels.reserve(idx.size());
    for (auto i : idx) out.labels.push_back(labels[i]);
    return out;
  }

  Dataset select_columns(std::span<const std::size_t> idx) const {
    return {features.select_columns(idx), labels, classes};
  }
};

}  // namespace tacoma
