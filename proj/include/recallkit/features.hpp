#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "recallkit/corpus.hpp"
#include "recallkit/matrix.hpp"
#include "recallkit/pca.hpp"

namespace recallkit {

struct PyramidLevel {
  int grid_side = 1;    // the level is a grid_side x grid_side grid
  int max_objects = 1;  // object slots per cell

  friend bool operator==(const PyramidLevel&, const PyramidLevel&) = default;
};

struct PyramidConfig {
  std::vector<PyramidLevel> levels;

  /// 1x1 with 5 slots, 2x2 with 3 slots, 3x3 with 2 slots.
  static PyramidConfig standard();

  /// Throws ArgumentError unless levels is nonempty and every side and slot count is >= 1.
  void validate() const;

  /// Compact form used in layout ids, e.g. "1x5,2x3,3x2".
  std::string describe() const;
  static PyramidConfig parse(std::string_view description);

  friend bool operator==(const PyramidConfig&, const PyramidConfig&) = default;
};

/// Per cell: [object_count, color_variance, person] followed by `max_objects` slots of
/// [scale, class encoding..., confidence]. Levels in order, cells row-major.
std::size_t feature_length(const PyramidConfig& config, std::size_t class_encoding_dim);

struct FeatureVector {
  std::vector<double> values;
  std::string layout_id;
};

/// Class names that count as a person for the baseline person flag.
const std::set<std::string>& default_person_concepts();

/// Cell containing the box center; centers on the far edge clamp into the last row/column.
std::size_t assign_cell(const BBox& bbox, int grid_side);

/// Mean over R, G, B of the population variance inside the cell. Empty cells give 0.
double cell_color_variance(const PixelBuffer& pixels, int grid_side, std::size_t cell);

/// Variances for every cell of an n x n grid, row-major.
std::vector<double> cell_color_variances(const PixelBuffer& pixels, int grid_side);

/// Sort order for slot filling: confidence descending, then class id, then box x ascending
/// (remaining box fields and the name only separate exact duplicates).
bool slot_order(const Detection& a, const Detection& b);

FeatureVector extract_baseline(const ImageRecord& record, const PixelBuffer& pixels,
                               const PyramidConfig& config,
                               const std::set<std::string>& person_concepts = default_person_concepts());

/// dot(u, v) / (|u| |v|), or 0 when either norm is 0.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Word-embedding variant: the class id in each slot becomes the class-name embedding
/// (optionally projected through a PCA basis) and the person flag becomes the maximum
/// cosine similarity between the cell's class names and `person_word`.
class EmbeddingFeaturizer {
 public:
  /// Throws ValidationError if `person_word` is not in the table, or if the reduction's
  /// input dimension does not match the table.
  EmbeddingFeaturizer(const EmbeddingTable& table, std::string person_word = "person",
                      std::optional<PcaBasis> reduction = std::nullopt);

  FeatureVector extract(const ImageRecord& record, const PixelBuffer& pixels,
                        const PyramidConfig& config) const;

  /// Length of a slot's class encoding: the embedding dimension, or the PCA output size.
  std::size_t class_dim() const;
  std::string layout_id(const PyramidConfig& config) const;

  /// Slot encoding of a class name. Out-of-vocabulary names encode as zeros.
  std::vector<double> encode_class(std::string_view class_name) const;
  double person_similarity(std::string_view class_name) const;

  const std::optional<PcaBasis>& reduction() const { return reduction_; }

 private:
  const EmbeddingTable* table_;
  std::string person_word_;
  std::vector<double> person_vector_;
  std::optional<PcaBasis> reduction_;
};

FeatureVector extract_embedding(const ImageRecord& record, const PixelBuffer& pixels,
                                const PyramidConfig& config, const EmbeddingTable& embeddings,
                                const std::string& person_word = "person");

/// Per-dimension min-max scaling fitted on training vectors.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::string layout_id, std::vector<double> mins, std::vector<double> maxs);

  /// Throws ArgumentError on empty input or mixed layouts.
  static Normalizer fit(std::span<const FeatureVector> train);
  static Normalizer fit(const Matrix& train, std::string layout_id);

  /// (x - min) / (max - min) clamped to [0,1]; constant dimensions map to 0.
  /// Throws ValidationError when the vector's layout differs from the fitted one.
  FeatureVector apply(const FeatureVector& v) const;
  void apply_in_place(std::span<double> values) const;
  void apply_in_place(Matrix& rows) const;

  const std::string& layout_id() const { return layout_id_; }
  const std::vector<double>& mins() const { return mins_; }
  const std::vector<double>& maxs() const { return maxs_; }
  std::size_t dimension() const { return mins_.size(); }

 private:
  std::string layout_id_;
  std::vector<double> mins_;
  std::vector<double> maxs_;
};

nlohmann::json to_json(const Normalizer& n);
Normalizer normalizer_from_json(const nlohmann::json& j);

/// One row per image: image_id followed by the feature values; header "image_id,f0,f1,...".
void write_feature_csv(std::ostream& out, std::span<const std::string> image_ids,
                       const Matrix& features);

}  // namespace recallkit
