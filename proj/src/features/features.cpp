#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include "recallkit/error.hpp"
#include "recallkit/features.hpp"
#include "recallkit/text.hpp"

namespace recallkit {

PyramidConfig PyramidConfig::standard() { return {{{1, 5}, {2, 3}, {3, 2}}}; }

void PyramidConfig::validate() const {
  if (levels.empty()) throw ArgumentError("pyramid needs at least one level");
  for (const auto& level : levels) {
    if (level.grid_side < 1 || level.max_objects < 1) {
      throw ArgumentError("pyramid level " + std::to_string(level.grid_side) + "x" +
                          std::to_string(level.max_objects) + " is invalid");
    }
  }
}

std::string PyramidConfig::describe() const {
  std::string out;
  for (const auto& level : levels) {
    if (!out.empty()) out += ',';
    out += std::to_string(level.grid_side) + "x" + std::to_string(level.max_objects);
  }
  return out;
}

PyramidConfig PyramidConfig::parse(std::string_view description) {
  PyramidConfig config;
  for (const auto& part : text::split(description, ',')) {
    const auto pieces = text::split(part, 'x');
    std::int64_t side = 0, slots = 0;
    if (pieces.size() != 2 || !text::parse_int(pieces[0], side) ||
        !text::parse_int(pieces[1], slots)) {
      throw ArgumentError("bad pyramid level '" + part + "' (want NxM)");
    }
    config.levels.push_back({static_cast<int>(side), static_cast<int>(slots)});
  }
  config.validate();
  return config;
}

std::size_t feature_length(const PyramidConfig& config, std::size_t class_encoding_dim) {
  std::size_t total = 0;
  for (const auto& level : config.levels) {
    const auto cells = static_cast<std::size_t>(level.grid_side) * level.grid_side;
    total += cells * (3 + static_cast<std::size_t>(level.max_objects) * (class_encoding_dim + 2));
  }
  return total;
}

const std::set<std::string>& default_person_concepts() {
  static const std::set<std::string> concepts{"person",   "worker", "workman", "employee",
                                              "consumer", "groom",  "bride"};
  return concepts;
}

std::size_t assign_cell(const BBox& bbox, int grid_side) {
  const auto n = static_cast<std::size_t>(grid_side);
  auto index = [n](double center) {
    const double scaled = std::floor(center * static_cast<double>(n));
    if (scaled <= 0.0) return std::size_t{0};
    return std::min(static_cast<std::size_t>(scaled), n - 1);
  };
  return index(bbox.center_y()) * n + index(bbox.center_x());
}

namespace {

struct CellRect {
  int row0, row1, col0, col1;
};

CellRect cell_rect(const PixelBuffer& pixels, int n, std::size_t cell) {
  const int r = static_cast<int>(cell / n);
  const int c = static_cast<int>(cell % n);
  return {r * pixels.height / n, (r + 1) * pixels.height / n, c * pixels.width / n,
          (c + 1) * pixels.width / n};
}

double rect_variance(const PixelBuffer& pixels, const CellRect& rect) {
  const auto count = static_cast<double>(rect.row1 - rect.row0) * (rect.col1 - rect.col0);
  if (count <= 0.0) return 0.0;
  double total = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    double sum = 0.0;
    for (int r = rect.row0; r < rect.row1; ++r) {
      for (int c = rect.col0; c < rect.col1; ++c) sum += pixels.at(r, c, ch);
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (int r = rect.row0; r < rect.row1; ++r) {
      for (int c = rect.col0; c < rect.col1; ++c) {
        const double d = pixels.at(r, c, ch) - mean;
        sq += d * d;
      }
    }
    total += sq / count;
  }
  return total / 3.0;
}

}  // namespace

double cell_color_variance(const PixelBuffer& pixels, int grid_side, std::size_t cell) {
  if (grid_side < 1) throw ArgumentError("grid_side must be >= 1");
  if (cell >= static_cast<std::size_t>(grid_side) * grid_side) {
    throw ArgumentError("cell index out of range");
  }
  return rect_variance(pixels, cell_rect(pixels, grid_side, cell));
}

std::vector<double> cell_color_variances(const PixelBuffer& pixels, int grid_side) {
  const auto cells = static_cast<std::size_t>(grid_side) * grid_side;
  std::vector<double> out(cells);
  for (std::size_t i = 0; i < cells; ++i) out[i] = rect_variance(pixels, cell_rect(pixels, grid_side, i));
  return out;
}

bool slot_order(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return std::tie(a.class_id, a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h, a.class_name) <
         std::tie(b.class_id, b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h, b.class_name);
}

namespace {

// Shared cell walk for both variants. `encode` appends the class encoding of one object;
// `person` scores a cell's full object list.
template <typename Encode, typename Person>
std::vector<double> extract_cells(const ImageRecord& record, const PixelBuffer& pixels,
                                  const PyramidConfig& config, std::size_t class_dim,
                                  Encode&& encode, Person&& person) {
  config.validate();
  std::vector<double> out;
  out.reserve(feature_length(config, class_dim));

  std::vector<const Detection*> sorted;
  sorted.reserve(record.detections.size());
  for (const auto& d : record.detections) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(),
            [](const Detection* a, const Detection* b) { return slot_order(*a, *b); });

  for (const auto& level : config.levels) {
    const int n = level.grid_side;
    const auto cells = static_cast<std::size_t>(n) * n;
    std::vector<std::vector<const Detection*>> members(cells);
    for (const auto* d : sorted) members[assign_cell(d->bbox, n)].push_back(d);
    const auto variances = cell_color_variances(pixels, n);

    for (std::size_t cell = 0; cell < cells; ++cell) {
      const auto& objects = members[cell];
      out.push_back(static_cast<double>(objects.size()));
      out.push_back(variances[cell]);
      out.push_back(person(objects));
      for (int slot = 0; slot < level.max_objects; ++slot) {
        if (static_cast<std::size_t>(slot) < objects.size()) {
          const Detection& d = *objects[slot];
          out.push_back(d.bbox.area());
          encode(d, out);
          out.push_back(d.confidence);
        } else {
          out.insert(out.end(), class_dim + 2, 0.0);
        }
      }
    }
  }
  return out;
}

}  // namespace

FeatureVector extract_baseline(const ImageRecord& record, const PixelBuffer& pixels,
                               const PyramidConfig& config,
                               const std::set<std::string>& person_concepts) {
  auto encode = [](const Detection& d, std::vector<double>& out) {
    out.push_back(static_cast<double>(d.class_id));
  };
  auto person = [&person_concepts](const std::vector<const Detection*>& objects) {
    for (const auto* d : objects) {
      if (person_concepts.contains(text::to_lower(d->class_name))) return 1.0;
    }
    return 0.0;
  };
  return {extract_cells(record, pixels, config, 1, encode, person),
          "baseline/" + config.describe()};
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ArgumentError("cosine_similarity: lengths " + std::to_string(u.size()) + " and " +
                        std::to_string(v.size()) + " differ");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

EmbeddingFeaturizer::EmbeddingFeaturizer(const EmbeddingTable& table, std::string person_word,
                                         std::optional<PcaBasis> reduction)
    : table_(&table), person_word_(std::move(person_word)), reduction_(std::move(reduction)) {
  const auto* person = table.find(person_word_);
  if (!person) {
    throw ValidationError("person word '" + person_word_ + "' is not in the embedding vocabulary");
  }
  person_vector_ = *person;
  if (reduction_ && reduction_->input_dim() != table.dimension()) {
    throw ValidationError("PCA basis expects " + std::to_string(reduction_->input_dim()) +
                          "-d input but embeddings are " + std::to_string(table.dimension()) + "-d");
  }
}

std::size_t EmbeddingFeaturizer::class_dim() const {
  return reduction_ ? reduction_->output_dim() : table_->dimension();
}

std::string EmbeddingFeaturizer::layout_id(const PyramidConfig& config) const {
  const std::string kind = reduction_ ? "w2v-pca" : "w2v";
  return kind + "-d" + std::to_string(class_dim()) + "/" + config.describe();
}

std::vector<double> EmbeddingFeaturizer::encode_class(std::string_view class_name) const {
  if (!reduction_) return table_->embed(class_name);
  if (!table_->covers(class_name)) return std::vector<double>(class_dim(), 0.0);
  return pca_transform(*reduction_, table_->embed(class_name));
}

double EmbeddingFeaturizer::person_similarity(std::string_view class_name) const {
  return cosine_similarity(table_->embed(class_name), person_vector_);
}

FeatureVector EmbeddingFeaturizer::extract(const ImageRecord& record, const PixelBuffer& pixels,
                                           const PyramidConfig& config) const {
  auto encode = [this](const Detection& d, std::vector<double>& out) {
    const auto code = encode_class(d.class_name);
    out.insert(out.end(), code.begin(), code.end());
  };
  auto person = [this](const std::vector<const Detection*>& objects) {
    if (objects.empty()) return 0.0;
    double best = -1.0;
    for (const auto* d : objects) best = std::max(best, person_similarity(d->class_name));
    return best;
  };
  return {extract_cells(record, pixels, config, class_dim(), encode, person), layout_id(config)};
}

FeatureVector extract_embedding(const ImageRecord& record, const PixelBuffer& pixels,
                                const PyramidConfig& config, const EmbeddingTable& embeddings,
                                const std::string& person_word) {
  return EmbeddingFeaturizer(embeddings, person_word).extract(record, pixels, config);
}

void write_feature_csv(std::ostream& out, std::span<const std::string> image_ids,
                       const Matrix& features) {
  if (image_ids.size() != features.rows()) {
    throw ArgumentError("write_feature_csv: id count does not match row count");
  }
  out << "image_id";
  for (std::size_t j = 0; j < features.cols(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out << image_ids[i];
    for (double v : features.row(i)) out << ',' << text::format_double(v);
    out << '\n';
  }
}

}  // namespace recallkit
