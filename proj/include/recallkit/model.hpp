#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "recallkit/corpus.hpp"
#include "recallkit/error.hpp"
#include "recallkit/features.hpp"
#include "recallkit/forest.hpp"
#include "recallkit/pca.hpp"
#include "recallkit/svm.hpp"

namespace recallkit {

/// The four pipeline configurations compared in the ablation.
enum class Variant {
  baseline,  // pyramid features + random forest
  w2v,       // embedding features + random forest
  w2v_pca,   // PCA-reduced embedding features + random forest
  svm,       // pyramid features + RBF SVM tuned on validation
};

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);
bool uses_embeddings(Variant v);

/// Builds raw (unnormalized) feature vectors for one variant.
class VariantFeaturizer {
 public:
  /// Embedding variants need `embeddings`; w2v_pca also needs `reduction`.
  VariantFeaturizer(Variant variant, PyramidConfig pyramid, const EmbeddingTable* embeddings,
                    std::string person_word = "person", std::optional<PcaBasis> reduction = {});

  FeatureVector extract(const ImageRecord& record, const PixelBuffer& pixels) const;
  std::string layout_id() const;
  std::size_t length() const;
  Variant variant() const { return variant_; }

 private:
  Variant variant_;
  PyramidConfig pyramid_;
  std::optional<EmbeddingFeaturizer> embedding_;
};

inline constexpr int kModelFormatVersion = 1;

/// Model file whose format_version or contents do not match this build.
class ModelFormatError : public DataError {
 public:
  using DataError::DataError;
};

/// A fitted classifier plus everything needed to featurize new images for it.
struct TrainedModel {
  Variant variant = Variant::baseline;
  PyramidConfig pyramid = PyramidConfig::standard();
  std::string person_word = "person";
  std::size_t embedding_dimension = 0;  // 0 for the pyramid-only variants
  Normalizer normalizer;
  std::optional<PcaBasis> pca;
  std::optional<RandomForest> forest;
  std::optional<SvmModel> svm;
  nlohmann::json config = nlohmann::json::object();  // hyperparameters, seed, split

  /// Normalizes then classifies a raw feature vector of this model's layout.
  Prediction predict(const FeatureVector& raw) const;
  /// Classifies an already-normalized row.
  Prediction classify(std::span<const double> normalized) const;

  /// Throws ValidationError if an embedding variant gets no (or a mismatched) table.
  VariantFeaturizer featurizer(const EmbeddingTable* embeddings) const;
};

nlohmann::json to_json(const TrainedModel& model);
/// Throws ModelFormatError on a version mismatch or malformed content.
TrainedModel model_from_json(const nlohmann::json& j);

/// Canonical text: pretty-printed JSON with sorted keys.
std::string serialize_model(const TrainedModel& model);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace recallkit
