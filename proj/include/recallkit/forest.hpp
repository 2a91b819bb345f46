#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "recallkit/corpus.hpp"
#include "recallkit/matrix.hpp"
#include "recallkit/tree.hpp"

namespace recallkit {

struct Prediction {
  Richness label = Richness::nonrich;
  double score = 0.0;  // fraction of trees voting rich (1/0 for the SVM)
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_features = 0;  // 0: ceil(sqrt(n_features))
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency; results do not depend on it
};

/// n draws with replacement from [0, n), seeded by `seed`.
std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed);

class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(std::vector<DecisionTree> trees, std::size_t n_features, std::size_t max_features,
               std::uint64_t seed);

  /// Label is rich iff at least half of the trees vote rich.
  Prediction predict(std::span<const double> x) const;

  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t max_features() const { return max_features_; }
  std::uint64_t seed() const { return seed_; }

  friend bool operator==(const RandomForest&, const RandomForest&) = default;

 private:
  std::vector<DecisionTree> trees_;
  std::size_t n_features_ = 0;
  std::size_t max_features_ = 0;
  std::uint64_t seed_ = 0;
};

/// Tree t is fit on bootstrap_sample(n, seed + t) with tree seed (seed + t).
RandomForest fit_forest(const Matrix& x, std::span<const int> y, const ForestParams& params = {});

nlohmann::json to_json(const RandomForest& forest);
RandomForest forest_from_json(const nlohmann::json& j);

}  // namespace recallkit
