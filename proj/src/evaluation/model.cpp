#include "recallkit/model.hpp"

#include "recallkit/text.hpp"

namespace recallkit {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::baseline: return "baseline";
    case Variant::w2v: return "w2v";
    case Variant::w2v_pca: return "w2v-pca";
    case Variant::svm: return "svm";
  }
  return "baseline";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (auto v : {Variant::baseline, Variant::w2v, Variant::w2v_pca, Variant::svm}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

bool uses_embeddings(Variant v) { return v == Variant::w2v || v == Variant::w2v_pca; }

VariantFeaturizer::VariantFeaturizer(Variant variant, PyramidConfig pyramid,
                                     const EmbeddingTable* embeddings, std::string person_word,
                                     std::optional<PcaBasis> reduction)
    : variant_(variant), pyramid_(std::move(pyramid)) {
  pyramid_.validate();
  if (uses_embeddings(variant)) {
    if (!embeddings) {
      throw ValidationError("variant " + std::string(to_string(variant)) + " needs word embeddings");
    }
    if (variant == Variant::w2v_pca && !reduction) {
      throw ValidationError("variant w2v-pca needs a fitted PCA basis");
    }
    if (variant == Variant::w2v) reduction.reset();
    embedding_.emplace(*embeddings, std::move(person_word), std::move(reduction));
  }
}

FeatureVector VariantFeaturizer::extract(const ImageRecord& record, const PixelBuffer& pixels) const {
  if (embedding_) return embedding_->extract(record, pixels, pyramid_);
  return extract_baseline(record, pixels, pyramid_);
}

std::string VariantFeaturizer::layout_id() const {
  return embedding_ ? embedding_->layout_id(pyramid_) : "baseline/" + pyramid_.describe();
}

std::size_t VariantFeaturizer::length() const {
  return feature_length(pyramid_, embedding_ ? embedding_->class_dim() : 1);
}

Prediction TrainedModel::predict(const FeatureVector& raw) const {
  return classify(normalizer.apply(raw).values);
}

Prediction TrainedModel::classify(std::span<const double> normalized) const {
  if (forest) return forest->predict(normalized);
  if (svm) {
    const auto label = svm->predict(normalized);
    return {label, label == Richness::rich ? 1.0 : 0.0};
  }
  throw ModelFormatError("model has no classifier");
}

VariantFeaturizer TrainedModel::featurizer(const EmbeddingTable* embeddings) const {
  if (uses_embeddings(variant) && embeddings && embeddings->dimension() != embedding_dimension) {
    throw ValidationError("model was trained with " + std::to_string(embedding_dimension) +
                          "-d embeddings, got " + std::to_string(embeddings->dimension()) + "-d");
  }
  return VariantFeaturizer(variant, pyramid, embeddings, person_word, pca);
}

nlohmann::json to_json(const TrainedModel& m) {
  nlohmann::json j{{"format_version", kModelFormatVersion},
                   {"variant", to_string(m.variant)},
                   {"pyramid", m.pyramid.describe()},
                   {"person_word", m.person_word},
                   {"embedding_dimension", m.embedding_dimension},
                   {"normalizer", to_json(m.normalizer)},
                   {"config", m.config}};
  if (m.pca) j["pca"] = to_json(*m.pca);
  if (m.forest) j["forest"] = to_json(*m.forest);
  if (m.svm) j["svm"] = to_json(*m.svm);
  return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelFormatError("model format_version " + std::to_string(version) +
                             " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    TrainedModel m;
    const auto variant = parse_variant(j.at("variant").get<std::string>());
    if (!variant) throw ModelFormatError("unknown model variant");
    m.variant = *variant;
    m.pyramid = PyramidConfig::parse(j.at("pyramid").get<std::string>());
    m.person_word = j.at("person_word").get<std::string>();
    m.embedding_dimension = j.at("embedding_dimension").get<std::size_t>();
    m.normalizer = normalizer_from_json(j.at("normalizer"));
    m.config = j.at("config");
    if (j.contains("pca")) m.pca = pca_from_json(j.at("pca"));
    if (j.contains("forest")) m.forest = forest_from_json(j.at("forest"));
    if (j.contains("svm")) m.svm = svm_from_json(j.at("svm"));
    if (m.forest.has_value() == m.svm.has_value()) {
      throw ModelFormatError("model must hold exactly one of forest or svm");
    }
    if ((m.variant == Variant::svm) != m.svm.has_value()) {
      throw ModelFormatError("classifier does not match variant " + std::string(to_string(m.variant)));
    }
    if (m.variant == Variant::w2v_pca && !m.pca) throw ModelFormatError("w2v-pca model without a PCA basis");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("malformed model: ") + e.what());
  } catch (const ModelFormatError&) {
    throw;
  } catch (const Error& e) {
    throw ModelFormatError(std::string("malformed model: ") + e.what());
  }
}

std::string serialize_model(const TrainedModel& model) { return to_json(model).dump(1) + "\n"; }

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  text::write_file_atomic(path, serialize_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  const std::string content = text::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(path.string() + ": not JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace recallkit
