#pragma once

// CART trees grown to purity and a bagged random-forest ensemble with vote
// tallies, margins, Gini importance and out-of-bag error. Also the 1-NN
// error estimator used to bound the Bayes rate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tacoma/dataset.hpp"
#include "tacoma/error.hpp"
#include "tacoma/rng.hpp"

namespace tacoma {

// phi(p) = sum p_i (1 - p_i) = 1 - sum p_i^2.
inline double gini(std::span<const double> p) {
  double total = 0.0;
  double squares = 0.0;
  for (double v : p) {
    if (v < 0.0) throw ArgumentError("negative probability");
    total += v;
    squares += v * v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("probabilities do not sum to 1");
  return 1.0 - squares;
}

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t samples = 0;      // in-bag examples reaching the node
  std::vector<std::uint32_t> histogram;  // leaves only
  int label = 0;                  // leaf majority, ties to the smaller class

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Nodes in preorder; the root is nodes[0] and a left child follows its parent.
struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<std::uint32_t> in_bag;  // sorted bootstrap multiset

  const TreeNode& leaf_for(std::span<const double> x) const {
    std::size_t k = 0;
    while (!nodes[k].is_leaf()) {
      const auto& n = nodes[k];
      k = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[k];
  }

  bool contains(std::uint32_t row) const { return std::binary_search(in_bag.begin(), in_bag.end(), row); }

  bool operator==(const Tree&) const = default;
};

struct ForestParams {
  int n_trees = 500;
  int mtry = 0;  // 0 selects round(sqrt(p))
  std::uint64_t seed = 0;

  bool operator==(const ForestParams&) const = default;
};

struct Forest {
  ForestParams params;
  int classes = 0;
  std::size_t features = 0;
  std::vector<Tree> trees;
  std::vector<double> importances;

  bool operator==(const Forest&) const = default;
};

struct VoteTally {
  std::vector<int> votes;

  int total() const { return std::accumulate(votes.begin(), votes.end(), 0); }
};

inline int default_mtry(std::size_t p) {
  return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(p)))));
}

// Resolves the grid names "0.5sqrt", "sqrt", "2sqrt" or a plain integer.
inline int resolve_mtry(const std::string& spec, std::size_t p) {
  const double root = std::sqrt(static_cast<double>(p));
  double v = 0.0;
  if (spec == "sqrt") {
    v = root;
  } else if (spec == "0.5sqrt") {
    v = 0.5 * root;
  } else if (spec == "2sqrt") {
    v = 2.0 * root;
  } else {
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(spec, &used);
    } catch (const std::exception&) {
      throw ArgumentError("bad mtry '" + spec + "'");
    }
    if (used != spec.size() || n < 1) throw ArgumentError("bad mtry '" + spec + "'");
    v = n;
  }
  return std::clamp(static_cast<int>(std::lround(v)), 1, static_cast<int>(std::max<std::size_t>(p, 1)));
}

inline int argmax_low(std::span<const std::uint32_t> counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

inline int argmax_low(std::span<const int> counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

namespace detail {

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, int mtry, Rng& rng, std::vector<double>& importance, double total)
      : data_(data), mtry_(mtry), rng_(rng), importance_(importance), total_(total),
        order_(data.dimension()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  std::vector<TreeNode> grow(std::vector<std::uint32_t> rows) {
    nodes_.clear();
    build(rows);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
  };

  std::int32_t build(std::vector<std::uint32_t>& rows) {
    const auto self = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    std::vector<std::uint32_t> hist(static_cast<std::size_t>(data_.classes), 0);
    for (auto r : rows) ++hist[static_cast<std::size_t>(data_.labels[r])];
    nodes_[static_cast<std::size_t>(self)].samples = static_cast<std::uint32_t>(rows.size());

    const auto nonzero = std::count_if(hist.begin(), hist.end(), [](auto c) { return c > 0; });
    const Split split = nonzero > 1 ? best_split(rows, hist) : Split{};
    if (split.feature < 0) {
      auto& leaf = nodes_[static_cast<std::size_t>(self)];
      leaf.label = argmax_low(std::span<const std::uint32_t>(hist));
      leaf.histogram = std::move(hist);
      return self;
    }

    importance_[static_cast<std::size_t>(split.feature)] +=
        static_cast<double>(rows.size()) / total_ * split.decrease;

    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    for (auto r : rows) {
      (data_.features.at(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    nodes_[static_cast<std::size_t>(self)].feature = split.feature;
    nodes_[static_cast<std::size_t>(self)].threshold = split.threshold;
    const auto l = build(left);
    const auto r = build(right);
    nodes_[static_cast<std::size_t>(self)].left = l;
    nodes_[static_cast<std::size_t>(self)].right = r;
    return self;
  }

  // Visits features in random order until mtry non-constant ones were scored.
  Split best_split(const std::vector<std::uint32_t>& rows, const std::vector<std::uint32_t>& hist) {
    const double n = static_cast<double>(rows.size());
    double parent_sq = 0.0;
    for (auto c : hist) parent_sq += static_cast<double>(c) * c;
    const double parent = 1.0 - parent_sq / (n * n);

    Split best;
    int scored = 0;
    const std::size_t p = order_.size();
    std::vector<std::pair<double, int>> column(rows.size());
    std::vector<double> left_counts(hist.size());
    for (std::size_t k = 0; k < p && scored < mtry_; ++k) {
      std::swap(order_[k], order_[k + rng_.index(p - k)]);
      const std::size_t f = order_[k];

      for (std::size_t i = 0; i < rows.size(); ++i) {
        column[i] = {data_.features.at(rows[i], f), data_.labels[rows[i]]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++scored;

      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      double left_sq = 0.0;
      double right_sq = parent_sq;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const auto c = static_cast<std::size_t>(column[i].second);
        const double lc = left_counts[c];
        const double rc = static_cast<double>(hist[c]) - lc;
        left_sq += 2.0 * lc + 1.0;
        right_sq -= 2.0 * rc - 1.0;
        left_counts[c] = lc + 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double children = (nl - left_sq / nl + nr - right_sq / nr) / n;
        const double decrease = parent - children;
        if (decrease > best.decrease + 1e-12) {
          double mid = 0.5 * (column[i].first + column[i + 1].first);
          if (!(mid < column[i + 1].first)) mid = column[i].first;
          best = {static_cast<int>(f), mid, decrease};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  int mtry_;
  Rng& rng_;
  std::vector<double>& importance_;
  double total_;
  std::vector<std::size_t> order_;
  std::vector<TreeNode> nodes_;
};

}  // namespace detail

/// Grows one unpruned CART tree on the in-bag multiset. Each node scores
/// features in random order until `mtry` features that vary within the node
/// have been evaluated, and splits at the midpoint with the largest Gini
/// decrease. Nodes become leaves when pure or when no split lowers impurity.
/// Weighted decreases (node size / in-bag size) are added to `importance`.
inline Tree grow_tree(const Dataset& data, std::span<const std::uint32_t> in_bag, int mtry, Rng& rng,
                      std::vector<double>& importance) {
  if (in_bag.empty()) throw ArgumentError("empty in-bag sample");
  const std::size_t p = data.dimension();
  if (mtry < 1 || static_cast<std::size_t>(mtry) > p) {
    throw ArgumentError("mtry must be in [1, " + std::to_string(p) + "]");
  }
  if (importance.size() != p) importance.assign(p, 0.0);
  for (auto r : in_bag) {
    if (r >= data.size()) throw ArgumentError("in-bag index out of range");
  }
  Tree tree;
  tree.in_bag.assign(in_bag.begin(), in_bag.end());
  std::sort(tree.in_bag.begin(), tree.in_bag.end());
  detail::TreeGrower grower(data, mtry, rng, importance, static_cast<double>(in_bag.size()));
  tree.nodes = grower.grow(tree.in_bag);
  return tree;
}

/// Bagged forest. Tree t draws its bootstrap and its feature orders from the
/// stream derive_seed(seed, t), so the model does not depend on `workers`.
inline Forest train_forest(const Dataset& data, const ForestParams& params, int workers = 1) {
  data.validate();
  if (params.n_trees < 1) throw ArgumentError("n_trees must be at least 1");
  const std::size_t n = data.size();
  const std::size_t p = data.dimension();
  if (p == 0) throw ArgumentError("dataset has no features");
  const int mtry = params.mtry > 0 ? params.mtry : default_mtry(p);

  Forest forest;
  forest.params = params;
  forest.params.mtry = mtry;
  forest.classes = data.classes;
  forest.features = p;
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));
  std::vector<std::vector<double>> per_tree(static_cast<std::size_t>(params.n_trees));

  auto grow_one = [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, t));
    std::vector<std::uint32_t> bag(n);
    for (auto& b : bag) b = static_cast<std::uint32_t>(rng.index(n));
    per_tree[t].assign(p, 0.0);
    forest.trees[t] = grow_tree(data, bag, mtry, rng, per_tree[t]);
  };

  workers = std::clamp(workers, 1, params.n_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < forest.trees.size(); ++t) grow_one(t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = static_cast<std::size_t>(w); t < forest.trees.size(); t += static_cast<std::size_t>(workers)) {
          grow_one(t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  forest.importances.assign(p, 0.0);
  for (const auto& imp : per_tree) {
    for (std::size_t j = 0; j < p; ++j) forest.importances[j] += imp[j];
  }
  return forest;
}

inline VoteTally predict_votes(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.features) {
    throw ArgumentError("feature vector has " + std::to_string(x.size()) + " values, model expects " +
                        std::to_string(forest.features));
  }
  VoteTally tally{std::vector<int>(static_cast<std::size_t>(forest.classes), 0)};
  for (const auto& tree : forest.trees) ++tally.votes[static_cast<std::size_t>(tree.leaf_for(x).label)];
  return tally;
}

// Top vote count minus the second-largest vote count.
inline int margin(const VoteTally& tally) {
  if (tally.votes.size() < 2) throw ArgumentError("margin needs at least two classes");
  int first = std::numeric_limits<int>::min();
  int second = std::numeric_limits<int>::min();
  for (int v : tally.votes) {
    if (v > first) {
      second = first;
      first = v;
    } else if (v > second) {
      second = v;
    }
  }
  return first - second;
}

inline int predict_class(const VoteTally& tally) { return argmax_low(std::span<const int>(tally.votes)); }

inline int predict_class(const Forest& forest, std::span<const double> x) {
  return predict_class(predict_votes(forest, x));
}

inline double error_rate(const Forest& forest, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict_class(forest, data.features.row(i)) != data.labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

struct OobReport {
  double error = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // examples in every tree's bootstrap
};

/// Majority vote per example over the trees whose bootstrap left it out.
/// `data` must be the training set the forest was grown on.
inline OobReport oob_error(const Forest& forest, const Dataset& data) {
  if (data.dimension() != forest.features) throw ArgumentError("dimension mismatch");
  OobReport rep;
  std::size_t wrong = 0;
  std::vector<int> votes(static_cast<std::size_t>(forest.classes));
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    int used = 0;
    for (const auto& tree : forest.trees) {
      if (tree.contains(static_cast<std::uint32_t>(i))) continue;
      ++votes[static_cast<std::size_t>(tree.leaf_for(data.features.row(i)).label)];
      ++used;
    }
    if (used == 0) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    if (argmax_low(std::span<const int>(votes)) != data.labels[i]) ++wrong;
  }
  rep.error = rep.evaluated ? static_cast<double>(wrong) / static_cast<double>(rep.evaluated) : 0.0;
  return rep;
}

// Features by descending accumulated Gini decrease, ties by index.
inline std::vector<std::pair<std::size_t, double>> importance_ranking(const Forest& forest) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(forest.importances.size());
  for (std::size_t j = 0; j < forest.importances.size(); ++j) out.emplace_back(j, forest.importances[j]);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

/// Euclidean 1-nearest-neighbour error of `test` against `train`.
/// Distance ties go to the smaller training index.
inline double nn1_error(const Dataset& train, const Dataset& test) {
  if (train.size() == 0) throw ArgumentError("empty training set");
  if (train.dimension() != test.dimension()) throw ArgumentError("dimension mismatch");
  if (test.size() == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto x = test.features.row(i);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < train.size(); ++j) {
      const auto z = train.features.row(j);
      double d = 0.0;
      for (std::size_t k = 0; k < x.size() && d < best; ++k) {
        const double diff = x[k] - z[k];
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (train.labels[best_j] != test.labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

}  // namespace tacoma
