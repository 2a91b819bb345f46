#include "recallkit/pipeline.hpp"

#include <algorithm>
#include <set>

#include "recallkit/log.hpp"
#include "recallkit/text.hpp"

namespace recallkit {

PcaBasis fit_class_pca(const Corpus& corpus, const SplitAssignment& split,
                       const EmbeddingTable& embeddings, std::size_t n_components,
                       std::vector<std::string>* contributors) {
  std::set<std::string> names;
  for (const auto& rec : corpus.images()) {
    if (split.split_of(rec) != Split::train) continue;
    bool used = false;
    for (const auto& d : rec.detections) {
      if (embeddings.covers(d.class_name)) {
        names.insert(text::to_lower(d.class_name));
        used = true;
      }
    }
    if (used && contributors) contributors->push_back(rec.image_id);
  }
  if (names.empty()) throw ValidationError("no training detection has an embedding to fit PCA on");

  Matrix rows;
  for (const auto& name : names) rows.append_row(embeddings.embed(name));
  const std::size_t limit = std::min(rows.rows(), rows.cols());
  if (n_components > limit) {
    log::warn("PCA: only " + std::to_string(rows.rows()) + " distinct training classes; using " +
              std::to_string(limit) + " components instead of " + std::to_string(n_components));
    n_components = limit;
  }
  return fit_pca(rows, n_components);
}

std::vector<SplitSets> build_feature_sets(const Corpus& corpus, const SplitAssignment& split,
                                          const std::vector<const VariantFeaturizer*>& featurizers) {
  std::vector<SplitSets> out(featurizers.size());
  for (const auto& rec : corpus.images()) {
    if (!rec.label) continue;
    const auto which = split.split_of(rec);
    if (!which) throw ValidationError("image " + rec.image_id + " belongs to no split");
    const PixelBuffer pixels = load_pixels(rec);
    for (std::size_t f = 0; f < featurizers.size(); ++f) {
      auto& sets = out[f];
      LabeledSet& target = *which == Split::train ? sets.train : *which == Split::val ? sets.val : sets.test;
      const auto v = featurizers[f]->extract(rec, pixels);
      target.ids.push_back(rec.image_id);
      target.x.append_row(v.values);
      target.y.push_back(*rec.label == Richness::rich ? 1 : 0);
    }
  }
  return out;
}

FitResult fit_variant(Variant variant, SplitSets& sets, const PipelineOptions& options,
                      const std::string& layout_id) {
  if (sets.train.x.empty()) throw ValidationError("training split has no labeled images");
  FitResult result;
  TrainedModel& model = result.model;
  model.variant = variant;
  model.pyramid = options.pyramid;
  model.person_word = options.person_word;

  model.normalizer = Normalizer::fit(sets.train.x, layout_id);
  result.audit.normalizer_ids = sets.train.ids;
  for (auto* set : {&sets.train, &sets.val, &sets.test}) model.normalizer.apply_in_place(set->x);

  nlohmann::json hyper;
  if (variant == Variant::svm) {
    if (sets.val.x.empty()) throw ValidationError("validation split has no labeled images");
    result.grid = grid_search_svm(sets.train.x, sets.train.y, sets.val.x, sets.val.y, options.c_grid,
                                  options.gamma_grid);
    result.audit.tuning_ids = sets.train.ids;
    result.audit.tuning_ids.insert(result.audit.tuning_ids.end(), sets.val.ids.begin(), sets.val.ids.end());
    model.svm = fit_svm(sets.train.x, sets.train.y, result.grid->best_C, result.grid->best_gamma);
    hyper = {{"classifier", "svm"},
             {"kernel", "rbf"},
             {"C", result.grid->best_C},
             {"gamma", result.grid->best_gamma},
             {"c_grid", options.c_grid},
             {"gamma_grid", options.gamma_grid}};
  } else {
    ForestParams params;
    params.n_trees = options.n_trees;
    params.max_features = options.max_features;
    params.seed = options.seed;
    params.threads = options.threads;
    model.forest = fit_forest(sets.train.x, sets.train.y, params);
    hyper = {{"classifier", "random_forest"},
             {"n_trees", options.n_trees},
             {"max_features", model.forest->max_features()},
             {"forest_seed", options.seed}};
  }
  result.audit.classifier_ids = sets.train.ids;
  hyper["pyramid"] = options.pyramid.describe();
  hyper["layout_id"] = layout_id;
  model.config = {{"hyperparameters", hyper}, {"seed", options.seed}};
  return result;
}

Confusion evaluate(const TrainedModel& model, const LabeledSet& rows) {
  std::vector<int> pred(rows.x.rows());
  for (std::size_t r = 0; r < rows.x.rows(); ++r) {
    pred[r] = model.classify(rows.x.row(r)).label == Richness::rich ? 1 : 0;
  }
  if (pred.empty()) return {};
  return confusion(rows.y, pred);
}

TrainResult train_variant(const Corpus& corpus, const EmbeddingTable* embeddings, Variant variant,
                          const PipelineOptions& options) {
  if (uses_embeddings(variant) && !embeddings) {
    throw ValidationError("variant " + std::string(to_string(variant)) + " needs word embeddings");
  }
  TrainResult out;
  out.split = day_split(corpus.images(), options.ratios, options.seed);

  std::optional<PcaBasis> pca;
  std::vector<std::string> pca_ids;
  if (variant == Variant::w2v_pca) {
    pca = fit_class_pca(corpus, out.split, *embeddings, options.pca_components, &pca_ids);
  }
  const VariantFeaturizer featurizer(variant, options.pyramid, embeddings, options.person_word, pca);
  auto sets = build_feature_sets(corpus, out.split, {&featurizer});
  out.sets = std::move(sets.front());

  out.fit = fit_variant(variant, out.sets, options, featurizer.layout_id());
  out.fit.audit.pca_ids = std::move(pca_ids);
  auto& model = out.fit.model;
  model.pca = std::move(pca);
  model.embedding_dimension = uses_embeddings(variant) ? embeddings->dimension() : 0;
  model.config["split"] = {{"train_days", out.split.train_days.size()},
                           {"val_days", out.split.val_days.size()},
                           {"test_days", out.split.test_days.size()},
                           {"ratios", {options.ratios.train, options.ratios.val, options.ratios.test}}};
  out.validation = evaluate(model, out.sets.val);
  return out;
}

}  // namespace recallkit
