#pragma once

// Margin-based co-training with two random-forest coupling classifiers, and
// the single-classifier self-training loop.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "tacoma/dataset.hpp"
#include "tacoma/error.hpp"
#include "tacoma/forest.hpp"
#include "tacoma/rng.hpp"
#include "tacoma/split.hpp"

namespace tacoma {

struct Pick {
  std::size_t row = 0;  // index into the original unlabeled pool
  int classifier = 1;   // 1 or 2; self-training always reports 1
  int label = 0;
  int margin = 0;
};

struct RoundLog {
  std::size_t round = 0;
  std::size_t unlabeled_before = 0;
  std::vector<Pick> picks;        // every pick, collisions included
  std::vector<Pick> transferred;  // what actually moved to the labeled pool
};

// A forest over a fixed subset of the columns.
struct SubspaceClassifier {
  Forest forest;
  std::vector<std::size_t> columns;

  int predict(std::span<const double> row) const {
    std::vector<double> x;
    x.reserve(columns.size());
    for (auto c : columns) x.push_back(row[c]);
    return predict_class(forest, x);
  }

  double error(const Dataset& data) const {
    if (data.size() == 0) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (predict(data.features.row(i)) != data.labels[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(data.size());
  }
};

struct CotrainResult {
  SubspaceClassifier classifier;  // f1 retrained on the terminal labeled pool
  std::vector<int> inferred;      // label given to each unlabeled row at transfer
  std::vector<RoundLog> log;
};

// Sub-seed for the coupling classifier k in round r (k = 1 for self-training).
inline std::uint64_t classifier_seed(std::uint64_t seed, std::size_t round, int k) {
  return derive_seed(derive_seed(seed, round), static_cast<std::uint64_t>(k));
}

namespace detail {

inline std::vector<std::size_t> all_columns(std::size_t p) {
  std::vector<std::size_t> c(p);
  std::iota(c.begin(), c.end(), std::size_t{0});
  return c;
}

inline SubspaceClassifier train_subspace(const Dataset& labeled, const std::vector<std::size_t>& columns,
                                         ForestParams params, std::uint64_t seed) {
  params.seed = seed;
  const Dataset view = labeled.select_columns(columns);
  if (params.mtry > static_cast<int>(columns.size())) params.mtry = static_cast<int>(columns.size());
  return {train_forest(view, params), columns};
}

// The `count` rows of `pool` with the largest margins; ties to the smaller row.
inline std::vector<Pick> pick_confident(const SubspaceClassifier& f, const FeatureTable& unlabeled,
                                        const std::vector<std::size_t>& pool, std::size_t count, int k) {
  std::vector<Pick> scored;
  scored.reserve(pool.size());
  std::vector<double> x(f.columns.size());
  for (auto row : pool) {
    const auto full = unlabeled.row(row);
    for (std::size_t c = 0; c < f.columns.size(); ++c) x[c] = full[f.columns[c]];
    const auto tally = predict_votes(f.forest, x);
    scored.push_back({row, k, predict_class(tally), margin(tally)});
  }
  count = std::min(count, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(count), scored.end(),
                    [](const Pick& a, const Pick& b) { return a.margin != b.margin ? a.margin > b.margin : a.row < b.row; });
  scored.resize(count);
  return scored;
}

inline void append_row(Dataset& labeled, std::span<const double> row, int label) {
  labeled.features.push_row(row);
  labeled.labels.push_back(label);
}

inline void check_inputs(const Dataset& l0, const FeatureTable& u0) {
  l0.validate();
  if (u0.rows > 0 && u0.cols != l0.dimension()) throw ArgumentError("unlabeled rows have a different width");
}

}  // namespace detail

/// Co-training over the first two subsets of `split` (pick_two selects which
/// ones when J > 2 before calling). Each round both classifiers are trained
/// on the current labeled pool, each picks its m_k most confident unlabeled
/// rows, and the union moves to the labeled pool. A row picked by both keeps
/// f1's label. Transferred labels are never revised.
inline CotrainResult cotrain(const Dataset& l0, const FeatureTable& u0, const FeatureSplit& split,
                             const ForestParams& params, std::size_t m1, std::size_t m2, std::uint64_t seed) {
  detail::check_inputs(l0, u0);
  if (split.parts() < 2) throw ArgumentError("co-training needs two feature subsets");
  if (m1 < 1 || m2 < 1) throw ArgumentError("transfer sizes must be at least 1");
  const auto& f1_cols = split.subsets[0];
  const auto& f2_cols = split.subsets[1];
  for (const auto* cols : {&f1_cols, &f2_cols}) {
    if (cols->empty()) throw ArgumentError("empty feature subset");
    if (cols->back() >= l0.dimension()) throw ArgumentError("feature subset exceeds the feature count");
  }

  CotrainResult result;
  result.inferred.assign(u0.rows, -1);
  Dataset labeled = l0;
  std::vector<std::size_t> pool(u0.rows);
  std::iota(pool.begin(), pool.end(), std::size_t{0});

  std::size_t round = 0;
  while (!pool.empty()) {
    const auto f1 = detail::train_subspace(labeled, f1_cols, params, classifier_seed(seed, round, 1));
    const auto f2 = detail::train_subspace(labeled, f2_cols, params, classifier_seed(seed, round, 2));
    RoundLog entry{round, pool.size(), {}, {}};
    auto picks1 = detail::pick_confident(f1, u0, pool, m1, 1);
    auto picks2 = detail::pick_confident(f2, u0, pool, m2, 2);
    entry.picks = picks1;
    entry.picks.insert(entry.picks.end(), picks2.begin(), picks2.end());
    entry.transferred = picks1;
    for (const auto& p : picks2) {
      const bool taken = std::any_of(picks1.begin(), picks1.end(), [&](const Pick& q) { return q.row == p.row; });
      if (!taken) entry.transferred.push_back(p);
    }
    for (const auto& p : entry.transferred) {
      detail::append_row(labeled, u0.row(p.row), p.label);
      result.inferred[p.row] = p.label;
      std::erase(pool, p.row);
    }
    result.log.push_back(std::move(entry));
    ++round;
  }
  result.classifier = detail::train_subspace(labeled, f1_cols, params, classifier_seed(seed, round, 1));
  return result;
}

/// One classifier over all features labels and transfers its own m most
/// confident rows each round.
inline CotrainResult self_train(const Dataset& l0, const FeatureTable& u0, const ForestParams& params, std::size_t m,
                                std::uint64_t seed) {
  detail::check_inputs(l0, u0);
  if (m < 1) throw ArgumentError("transfer size must be at least 1");
  const auto cols = detail::all_columns(l0.dimension());
  CotrainResult result;
  result.inferred.assign(u0.rows, -1);
  Dataset labeled = l0;
  std::vector<std::size_t> pool(u0.rows);
  std::iota(pool.begin(), pool.end(), std::size_t{0});

  std::size_t round = 0;
  while (!pool.empty()) {
    const auto f = detail::train_subspace(labeled, cols, params, classifier_seed(seed, round, 1));
    RoundLog entry{round, pool.size(), detail::pick_confident(f, u0, pool, m, 1), {}};
    entry.transferred = entry.picks;
    for (const auto& p : entry.transferred) {
      detail::append_row(labeled, u0.row(p.row), p.label);
      result.inferred[p.row] = p.label;
      std::erase(pool, p.row);
    }
    result.log.push_back(std::move(entry));
    ++round;
  }
  result.classifier = detail::train_subspace(labeled, cols, params, classifier_seed(seed, round, 1));
  return result;
}

}  // namespace tacoma
