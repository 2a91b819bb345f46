#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recallkit/corpus.hpp"
#include "recallkit/metrics.hpp"
#include "recallkit/model.hpp"

namespace recallkit {

/// Knobs shared by single-variant training and the ablation matrix.
struct PipelineOptions {
  PyramidConfig pyramid = PyramidConfig::standard();
  SplitRatios ratios{};
  std::uint64_t seed = 0;
  std::size_t n_trees = 100;
  std::size_t max_features = 0;  // 0: ceil(sqrt(d))
  unsigned threads = 0;
  std::size_t pca_components = 30;
  std::vector<double> c_grid = default_c_grid();
  std::vector<double> gamma_grid = default_gamma_grid();
  std::string person_word = "person";
};

/// Feature rows for one split.
struct LabeledSet {
  std::vector<std::string> ids;
  Matrix x;
  std::vector<int> y;  // 1 = rich
};

struct SplitSets {
  LabeledSet train, val, test;
};

/// PCA over the embeddings of every distinct in-vocabulary class name detected in the
/// training images. The component count is lowered (with a warning) when fewer distinct
/// classes than requested are available. `contributors` receives the image ids used.
PcaBasis fit_class_pca(const Corpus& corpus, const SplitAssignment& split,
                       const EmbeddingTable& embeddings, std::size_t n_components,
                       std::vector<std::string>* contributors = nullptr);

/// Decodes each labeled image once and runs every featurizer on it; result i belongs to
/// featurizer i. Throws ValidationError if a labeled image lies outside the split.
std::vector<SplitSets> build_feature_sets(const Corpus& corpus, const SplitAssignment& split,
                                          const std::vector<const VariantFeaturizer*>& featurizers);

/// Which image ids reached each fitting step; used to prove the test split stays unseen.
struct FitAudit {
  std::vector<std::string> normalizer_ids;
  std::vector<std::string> classifier_ids;
  std::vector<std::string> pca_ids;
  std::vector<std::string> tuning_ids;
};

struct FitResult {
  TrainedModel model;
  std::optional<GridSearchResult> grid;
  FitAudit audit;
};

/// Normalizer on train, then the variant's classifier; the SVM picks (C, gamma) on `val`.
/// `sets` are raw feature rows; they are normalized in place.
FitResult fit_variant(Variant variant, SplitSets& sets, const PipelineOptions& options,
                      const std::string& layout_id);

Confusion evaluate(const TrainedModel& model, const LabeledSet& normalized_rows);

struct TrainResult {
  FitResult fit;
  SplitAssignment split;
  Confusion validation;
  SplitSets sets;
};

/// Split by day, featurize, fit on train, tune and report on validation.
TrainResult train_variant(const Corpus& corpus, const EmbeddingTable* embeddings, Variant variant,
                          const PipelineOptions& options);

}  // namespace recallkit
