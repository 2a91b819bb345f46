#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "recallkit/matrix.hpp"

namespace recallkit {

/// 1 - sum p_i^2. Throws ArgumentError when every count is zero.
double gini(std::span<const std::size_t> class_counts);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // taken when x[feature] <= threshold
  int right = -1;
  std::array<std::uint32_t, 2> counts{};  // training samples per class reaching the node

  bool is_leaf() const { return feature < 0; }
  /// Majority class; an exact tie goes to class 1.
  int majority() const { return counts[1] >= counts[0] ? 1 : 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary CART tree, labels 0/1, Gini criterion, grown without a depth limit.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::uint64_t seed);

  int predict(std::span<const double> x) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
  std::uint64_t seed_ = 0;
};

/// Candidate thresholds per feature are capped at this many quantile midpoints.
inline constexpr std::size_t kMaxThresholds = 256;

/// Fits on every row of `x`. `max_features` of 0 means all features.
/// At each node, features are visited in a random order drawn from a seed derived from
/// (seed, node id); constant features are skipped without counting, and the search stops
/// after `max_features` informative ones. Ties in impurity go to the lower feature index,
/// then the lower threshold. Throws ArgumentError on empty or mismatched input.
DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::size_t max_features,
                      std::uint64_t seed);

/// Same, on a multiset of row indices (used for bootstrap samples).
DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                      std::size_t max_features, std::uint64_t seed);

nlohmann::json to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& j);

}  // namespace recallkit
