#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "recallkit/metrics.hpp"
#include "recallkit/pipeline.hpp"

namespace recallkit {

struct SplitSizes {
  std::size_t train_days = 0, val_days = 0, test_days = 0;
  std::size_t train_images = 0, val_images = 0, test_images = 0;
};

/// Test-split results of one configuration of the ablation matrix.
struct EvalReport {
  std::string config_id;  // rfc, rfc_w2v, rfc_w2v_pca, svm
  std::string name;       // display label of the row
  Variant variant = Variant::baseline;
  Confusion confusion;    // on test
  Confusion validation;   // on validation, for reference
  WeightedScores weighted;
  SplitSizes sizes;
  std::uint64_t seed = 0;
  nlohmann::json hyperparameters = nlohmann::json::object();
  std::vector<GridCell> grid;  // svm only

  double precision() const { return confusion.precision(); }
  double recall() const { return confusion.recall(); }
  double f1() const { return confusion.f1(); }
};

struct MatrixResult {
  std::vector<EvalReport> reports;  // always the four configurations, in table order
  std::vector<FitAudit> audits;     // parallel to reports
  SplitAssignment split;
  std::vector<std::string> test_ids;
};

/// Fits all four configurations on one shared day split and reports each on test.
/// Throws ValidationError when `embeddings` is null or the corpus has no labels.
MatrixResult run_matrix(const Corpus& corpus, const EmbeddingTable* embeddings,
                        const PipelineOptions& options);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const MatrixResult& result);

/// Pretty-printed JSON with sorted keys and a trailing newline; byte-stable per seed.
std::string serialize_report(const MatrixResult& result);

/// One row per configuration: config,precision,recall,f1,weighted_f1,tp,fp,tn,fn.
std::string report_csv(const MatrixResult& result);

}  // namespace recallkit
