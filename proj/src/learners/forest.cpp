#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "recallkit/error.hpp"
#include "recallkit/forest.hpp"
#include "recallkit/random.hpp"

namespace recallkit {

std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> sample(n);
  for (auto& s : sample) s = rng.index(n);
  return sample;
}

RandomForest::RandomForest(std::vector<DecisionTree> trees, std::size_t n_features,
                           std::size_t max_features, std::uint64_t seed)
    : trees_(std::move(trees)), n_features_(n_features), max_features_(max_features), seed_(seed) {
  if (trees_.empty()) throw ArgumentError("RandomForest: no trees");
}

Prediction RandomForest::predict(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw ValidationError("forest expects " + std::to_string(n_features_) + " features, got " +
                          std::to_string(x.size()));
  }
  std::size_t rich_votes = 0;
  for (const auto& tree : trees_) rich_votes += static_cast<std::size_t>(tree.predict(x));
  Prediction p;
  p.score = static_cast<double>(rich_votes) / static_cast<double>(trees_.size());
  p.label = 2 * rich_votes >= trees_.size() ? Richness::rich : Richness::nonrich;
  return p;
}

RandomForest fit_forest(const Matrix& x, std::span<const int> y, const ForestParams& params) {
  if (params.n_trees < 1) throw ArgumentError("fit_forest: n_trees must be >= 1");
  if (x.rows() == 0 || x.cols() == 0) throw ArgumentError("fit_forest: empty training set");
  if (x.rows() != y.size()) throw ArgumentError("fit_forest: X rows and y length differ");

  const std::size_t max_features =
      params.max_features > 0
          ? std::min(params.max_features, x.cols())
          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));

  std::vector<DecisionTree> trees(params.n_trees);
  auto train_one = [&](std::size_t t) {
    const std::uint64_t tree_seed = params.seed + t;
    const auto sample = bootstrap_sample(x.rows(), tree_seed);
    trees[t] = fit_tree(x, y, sample, max_features, tree_seed);
  };

  unsigned threads = params.threads != 0 ? params.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(params.n_trees)));
  if (threads == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) train_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t t = next++; t < params.n_trees; t = next++) {
          try {
            train_one(t);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    workers.clear();
    if (failure) std::rethrow_exception(failure);
  }
  return RandomForest(std::move(trees), x.cols(), max_features, params.seed);
}

nlohmann::json to_json(const RandomForest& forest) {
  auto trees = nlohmann::json::array();
  for (const auto& t : forest.trees()) trees.push_back(to_json(t));
  return {{"n_features", forest.n_features()},
          {"max_features", forest.max_features()},
          {"seed", forest.seed()},
          {"trees", std::move(trees)}};
}

RandomForest forest_from_json(const nlohmann::json& j) {
  std::vector<DecisionTree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
  return RandomForest(std::move(trees), j.at("n_features").get<std::size_t>(),
                      j.at("max_features").get<std::size_t>(), j.at("seed").get<std::uint64_t>());
}

}  // namespace recallkit
