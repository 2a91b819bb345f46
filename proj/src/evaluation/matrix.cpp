#include "recallkit/evaluation.hpp"

#include <algorithm>
#include <sstream>

#include "recallkit/text.hpp"

namespace recallkit {

namespace {

struct ConfigRow {
  const char* id;
  const char* name;
  Variant variant;
};

constexpr ConfigRow kRows[] = {
    {"rfc", "(1) RFC", Variant::baseline},
    {"rfc_w2v", "(2) RFC + Word2Vec", Variant::w2v},
    {"rfc_w2v_pca", "(3) RFC + Word2Vec + PCA", Variant::w2v_pca},
    {"svm", "(4) SVM", Variant::svm},
};

nlohmann::json days_json(const std::set<DayKey>& days) {
  auto arr = nlohmann::json::array();
  for (const auto& d : days) arr.push_back({d.user_id, d.day_id});
  return arr;
}

nlohmann::json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

}  // namespace

MatrixResult run_matrix(const Corpus& corpus, const EmbeddingTable* embeddings,
                        const PipelineOptions& options) {
  if (!embeddings) throw ValidationError("the ablation matrix needs word embeddings for configs (2) and (3)");
  const bool labeled = std::any_of(corpus.images().begin(), corpus.images().end(),
                                   [](const ImageRecord& r) { return r.label.has_value(); });
  if (!labeled) throw ValidationError("corpus has no labeled images");

  MatrixResult out;
  out.split = day_split(corpus.images(), options.ratios, options.seed);

  std::vector<std::string> pca_ids;
  PcaBasis pca = fit_class_pca(corpus, out.split, *embeddings, options.pca_components, &pca_ids);

  const VariantFeaturizer baseline(Variant::baseline, options.pyramid, nullptr, options.person_word);
  const VariantFeaturizer w2v(Variant::w2v, options.pyramid, embeddings, options.person_word);
  const VariantFeaturizer w2v_pca(Variant::w2v_pca, options.pyramid, embeddings, options.person_word, pca);
  auto sets = build_feature_sets(corpus, out.split, {&baseline, &w2v, &w2v_pca});
  // The SVM row shares the baseline features; fit_variant normalizes in place, so copy first.
  sets.push_back(sets[0]);
  const VariantFeaturizer* featurizers[] = {&baseline, &w2v, &w2v_pca, &baseline};

  out.test_ids = sets[0].test.ids;
  SplitSizes sizes{out.split.train_days.size(), out.split.val_days.size(), out.split.test_days.size(),
                   sets[0].train.ids.size(),    sets[0].val.ids.size(),    sets[0].test.ids.size()};

  for (std::size_t i = 0; i < 4; ++i) {
    const auto& row = kRows[i];
    FitResult fit = fit_variant(row.variant, sets[i], options, featurizers[i]->layout_id());
    if (row.variant == Variant::w2v_pca) {
      fit.model.pca = pca;
      fit.audit.pca_ids = pca_ids;
    }
    EvalReport report;
    report.config_id = row.id;
    report.name = row.name;
    report.variant = row.variant;
    report.confusion = evaluate(fit.model, sets[i].test);
    report.validation = evaluate(fit.model, sets[i].val);
    report.weighted = weighted_scores(report.confusion);
    report.sizes = sizes;
    report.seed = options.seed;
    report.hyperparameters = fit.model.config.at("hyperparameters");
    if (row.variant == Variant::w2v_pca) {
      report.hyperparameters["pca_components"] = pca.output_dim();
      report.hyperparameters["pca_explained_variance"] = pca.explained_variance_ratio;
    }
    if (fit.grid) report.grid = fit.grid->cells;
    out.reports.push_back(std::move(report));
    out.audits.push_back(std::move(fit.audit));
  }
  return out;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j{{"config", r.config_id},
                   {"name", r.name},
                   {"variant", to_string(r.variant)},
                   {"precision", r.precision()},
                   {"recall", r.recall()},
                   {"f1", r.f1()},
                   {"confusion", confusion_json(r.confusion)},
                   {"weighted", {{"precision", r.weighted.precision},
                                 {"recall", r.weighted.recall},
                                 {"f1", r.weighted.f1}}},
                   {"validation", {{"precision", r.validation.precision()},
                                   {"recall", r.validation.recall()},
                                   {"f1", r.validation.f1()},
                                   {"confusion", confusion_json(r.validation)}}},
                   {"split_sizes", {{"train_days", r.sizes.train_days},
                                    {"val_days", r.sizes.val_days},
                                    {"test_days", r.sizes.test_days},
                                    {"train_images", r.sizes.train_images},
                                    {"val_images", r.sizes.val_images},
                                    {"test_images", r.sizes.test_images}}},
                   {"seed", r.seed},
                   {"hyperparameters", r.hyperparameters}};
  if (!r.grid.empty()) {
    auto cells = nlohmann::json::array();
    for (const auto& c : r.grid) {
      nlohmann::json cell{{"C", c.C}, {"gamma", c.gamma}};
      cell["val_f1"] = c.val_f1 ? nlohmann::json(*c.val_f1) : nlohmann::json(nullptr);
      if (!c.error.empty()) cell["error"] = c.error;
      cells.push_back(std::move(cell));
    }
    j["grid"] = std::move(cells);
  }
  return j;
}

nlohmann::json to_json(const MatrixResult& result) {
  auto configs = nlohmann::json::array();
  for (const auto& r : result.reports) configs.push_back(to_json(r));
  return {{"configs", configs},
          {"seed", result.split.seed},
          {"split", {{"train", days_json(result.split.train_days)},
                     {"val", days_json(result.split.val_days)},
                     {"test", days_json(result.split.test_days)}}}};
}

std::string serialize_report(const MatrixResult& result) { return to_json(result).dump(2) + "\n"; }

std::string report_csv(const MatrixResult& result) {
  std::ostringstream out;
  out << "config,precision,recall,f1,weighted_f1,tp,fp,tn,fn\n";
  for (const auto& r : result.reports) {
    out << r.config_id << ',' << text::format_double(r.precision()) << ','
        << text::format_double(r.recall()) << ',' << text::format_double(r.f1()) << ','
        << text::format_double(r.weighted.f1) << ',' << r.confusion.tp << ',' << r.confusion.fp << ','
        << r.confusion.tn << ',' << r.confusion.fn << '\n';
  }
  return out.str();
}

}  // namespace recallkit
