#include <algorithm>
#include <numeric>

#include "recallkit/error.hpp"
#include "recallkit/random.hpp"
#include "recallkit/tree.hpp"

namespace recallkit {

double gini(std::span<const std::size_t> class_counts) {
  double total = 0.0;
  for (auto c : class_counts) total += static_cast<double>(c);
  if (total <= 0.0) throw ArgumentError("gini: all class counts are zero");
  double sum_sq = 0.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::uint64_t seed)
    : nodes_(std::move(nodes)), seed_(seed) {
  if (nodes_.empty()) throw ArgumentError("DecisionTree: no nodes");
  const int n = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (!node.is_leaf() && (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n)) {
      throw ValidationError("DecisionTree: internal node with a missing child");
    }
    if (node.is_leaf() && node.counts[0] + node.counts[1] == 0) {
      throw ValidationError("DecisionTree: empty leaf");
    }
  }
}

int DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    i = static_cast<std::size_t>(x[node.feature] <= node.threshold ? node.left : node.right);
  }
  return nodes_[i].majority();
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t best = 0;
  // Children always have larger indices than their parent.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, depth[i]);
    if (!nodes_[i].is_leaf()) {
      depth[nodes_[i].left] = depth[i] + 1;
      depth[nodes_[i].right] = depth[i] + 1;
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity
};

constexpr double kTieEpsilon = 1e-12;

bool better(const SplitChoice& candidate, const SplitChoice& best) {
  if (best.feature < 0) return true;
  if (candidate.impurity < best.impurity - kTieEpsilon) return true;
  if (candidate.impurity > best.impurity + kTieEpsilon) return false;
  return std::tie(candidate.feature, candidate.threshold) < std::tie(best.feature, best.threshold);
}

double weighted_gini(double l0, double l1, double r0, double r1) {
  const double nl = l0 + l1;
  const double nr = r0 + r1;
  const double gl = 1.0 - (l0 * l0 + l1 * l1) / (nl * nl);
  const double gr = 1.0 - (r0 * r0 + r1 * r1) / (nr * nr);
  return (nl * gl + nr * gr) / (nl + nr);
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, std::size_t max_features, std::uint64_t seed)
      : x_(x), y_(y), max_features_(max_features == 0 ? x.cols() : std::min(max_features, x.cols())),
        seed_(seed) {}

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    struct Pending {
      std::size_t node;
      std::vector<std::size_t> rows;
    };
    nodes_.clear();
    nodes_.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(rows)});
    while (!stack.empty()) {
      Pending item = std::move(stack.back());
      stack.pop_back();
      auto& node = nodes_[item.node];
      for (auto r : item.rows) ++node.counts[static_cast<std::size_t>(y_[r])];
      if (node.counts[0] == 0 || node.counts[1] == 0) continue;

      const auto split = find_split(item.rows, item.node);
      if (split.feature < 0) continue;

      std::vector<std::size_t> left, right;
      for (auto r : item.rows) {
        (x_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
      }
      const auto left_id = nodes_.size();
      nodes_.emplace_back();
      nodes_.emplace_back();
      auto& parent = nodes_[item.node];
      parent.feature = split.feature;
      parent.threshold = split.threshold;
      parent.left = static_cast<int>(left_id);
      parent.right = static_cast<int>(left_id + 1);
      // Right first so the left subtree is expanded (and numbered) first.
      stack.push_back({left_id + 1, std::move(right)});
      stack.push_back({left_id, std::move(left)});
    }
    return std::move(nodes_);
  }

 private:
  SplitChoice find_split(const std::vector<std::size_t>& rows, std::size_t node_id) {
    const auto& node = nodes_[node_id];
    const double n0 = node.counts[0];
    const double n1 = node.counts[1];
    const double total = n0 + n1;
    const double parent_impurity = 1.0 - (n0 * n0 + n1 * n1) / (total * total);

    Rng rng(derive_seed(seed_, node_id));
    const std::size_t d = x_.cols();
    order_.resize(d);
    std::iota(order_.begin(), order_.end(), std::size_t{0});

    SplitChoice best;
    std::size_t informative = 0;
    for (std::size_t k = 0; k < d && informative < max_features_; ++k) {
      std::swap(order_[k], order_[k + rng.index(d - k)]);
      const std::size_t feature = order_[k];
      if (evaluate_feature(rows, feature, n0, n1, best)) ++informative;
    }
    if (best.feature >= 0 && best.impurity < parent_impurity - kTieEpsilon) return best;
    return {};
  }

  // Returns false when the feature is constant on `rows`.
  bool evaluate_feature(const std::vector<std::size_t>& rows, std::size_t feature, double n0,
                        double n1, SplitChoice& best) {
    values_.clear();
    double lo = x_(rows.front(), feature), hi = lo;
    for (auto r : rows) {
      const double v = x_(r, feature);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      values_.push_back({v, y_[r]});
    }
    if (!(lo < hi)) return false;
    std::sort(values_.begin(), values_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Group into distinct values with per-class counts.
    distinct_.clear();
    for (const auto& [v, label] : values_) {
      if (distinct_.empty() || distinct_.back().value != v) distinct_.push_back({v, {0, 0}});
      ++distinct_.back().counts[static_cast<std::size_t>(label)];
    }
    const std::size_t k = distinct_.size();

    // Boundary b separates distinct values b-1 and b, for b in [1, k).
    boundaries_.clear();
    if (k - 1 <= kMaxThresholds) {
      for (std::size_t b = 1; b < k; ++b) boundaries_.push_back(b);
    } else {
      for (std::size_t q = 1; q <= kMaxThresholds; ++q) {
        const std::size_t b = std::clamp<std::size_t>(q * k / (kMaxThresholds + 1), 1, k - 1);
        if (boundaries_.empty() || boundaries_.back() != b) boundaries_.push_back(b);
      }
    }

    double l0 = 0.0, l1 = 0.0;
    std::size_t next = 0;
    for (std::size_t b : boundaries_) {
      for (; next < b; ++next) {
        l0 += distinct_[next].counts[0];
        l1 += distinct_[next].counts[1];
      }
      const double below = distinct_[b - 1].value;
      const double above = distinct_[b].value;
      double threshold = below + (above - below) / 2.0;
      if (!(threshold < above)) threshold = below;
      SplitChoice candidate{static_cast<int>(feature), threshold,
                            weighted_gini(l0, l1, n0 - l0, n1 - l1)};
      if (better(candidate, best)) best = candidate;
    }
    return true;
  }

  struct Distinct {
    double value;
    std::array<double, 2> counts;
  };

  const Matrix& x_;
  std::span<const int> y_;
  std::size_t max_features_;
  std::uint64_t seed_;
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> order_;
  std::vector<std::pair<double, int>> values_;
  std::vector<Distinct> distinct_;
  std::vector<std::size_t> boundaries_;
};

void check_inputs(const Matrix& x, std::span<const int> y) {
  if (x.rows() == 0 || x.cols() == 0) throw ArgumentError("fit_tree: empty training set");
  if (x.rows() != y.size()) throw ArgumentError("fit_tree: X rows and y length differ");
  for (int label : y) {
    if (label != 0 && label != 1) throw ArgumentError("fit_tree: labels must be 0 or 1");
  }
}

}  // namespace

DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::size_t max_features,
                      std::uint64_t seed) {
  check_inputs(x, y);
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(x, y, rows, max_features, seed);
}

DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                      std::size_t max_features, std::uint64_t seed) {
  check_inputs(x, y);
  if (rows.empty()) throw ArgumentError("fit_tree: empty sample");
  for (auto r : rows) {
    if (r >= x.rows()) throw ArgumentError("fit_tree: sample index out of range");
  }
  TreeBuilder builder(x, y, max_features, seed);
  return DecisionTree(builder.build({rows.begin(), rows.end()}), seed);
}

nlohmann::json to_json(const DecisionTree& tree) {
  auto nodes = nlohmann::json::array();
  for (const auto& n : tree.nodes()) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.counts[0], n.counts[1]});
  }
  return {{"seed", tree.seed()}, {"nodes", std::move(nodes)}};
}

DecisionTree tree_from_json(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.counts = {n.at(4).get<std::uint32_t>(), n.at(5).get<std::uint32_t>()};
    nodes.push_back(node);
  }
  return DecisionTree(std::move(nodes), j.at("seed").get<std::uint64_t>());
}

}  // namespace recallkit
