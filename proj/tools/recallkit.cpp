// Operator entry point: synth, train, eval, select, features, serve.
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal failure.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "recallkit/evaluation.hpp"
#include "recallkit/select.hpp"
#include "recallkit/service.hpp"
#include "recallkit/synthetic.hpp"
#include "recallkit/text.hpp"

namespace fs = std::filesystem;
using namespace recallkit;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kInternal = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json confusion_summary(const Confusion& c) {
  return {{"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()},
          {"tp", c.tp},                 {"fp", c.fp},           {"tn", c.tn},
          {"fn", c.fn}};
}

std::optional<EmbeddingTable> embeddings_for(const std::string& flag, const fs::path& corpus_dir) {
  if (!flag.empty()) return load_embeddings(flag);
  const fs::path fallback = corpus_dir / CorpusLayout::embeddings;
  if (!corpus_dir.empty() && fs::exists(fallback)) return load_embeddings(fallback);
  return std::nullopt;
}

struct TrainArgs {
  std::string corpus, variant, out, embeddings;
  std::uint64_t seed = 0;
  std::size_t trees = 100;
  std::size_t pca = 30;
  unsigned threads = 0;
};

int cmd_train(const TrainArgs& a) {
  const auto variant = parse_variant(a.variant);
  if (!variant) throw UsageError("--variant must be one of baseline, w2v, w2v-pca, svm");
  if (uses_embeddings(*variant) && a.embeddings.empty()) {
    throw UsageError("variant " + a.variant + " requires --embeddings");
  }
  const Corpus corpus = Corpus::load(a.corpus);
  std::optional<EmbeddingTable> table;
  if (!a.embeddings.empty()) table = load_embeddings(a.embeddings);

  PipelineOptions options;
  options.seed = a.seed;
  options.n_trees = a.trees;
  options.pca_components = a.pca;
  options.threads = a.threads;
  const TrainResult result = train_variant(corpus, table ? &*table : nullptr, *variant, options);
  save_model(result.fit.model, a.out);

  const auto& v = result.validation;
  std::cerr << "trained " << a.variant << " on " << result.sets.train.ids.size() << " images ("
            << result.split.train_days.size() << "/" << result.split.val_days.size() << "/"
            << result.split.test_days.size() << " days); validation F1 " << text::format_double(v.f1())
            << "\nmodel written to " << a.out << "\n";
  nlohmann::json out{{"variant", a.variant},
                     {"model", a.out},
                     {"seed", a.seed},
                     {"split", {{"train_days", result.split.train_days.size()},
                                {"val_days", result.split.val_days.size()},
                                {"test_days", result.split.test_days.size()}}},
                     {"validation", confusion_summary(v)},
                     {"hyperparameters", result.fit.model.config.at("hyperparameters")}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct EvalArgs {
  std::string corpus, embeddings, report, csv;
  std::uint64_t seed = 0;
  std::size_t trees = 100;
  std::size_t pca = 30;
  unsigned threads = 0;
};

int cmd_eval(const EvalArgs& a) {
  const Corpus corpus = Corpus::load(a.corpus);
  const EmbeddingTable table = load_embeddings(a.embeddings);
  PipelineOptions options;
  options.seed = a.seed;
  options.n_trees = a.trees;
  options.pca_components = a.pca;
  options.threads = a.threads;
  const MatrixResult result = run_matrix(corpus, &table, options);
  const std::string report = serialize_report(result);
  text::write_file_atomic(a.report, report);
  if (!a.csv.empty()) text::write_file_atomic(a.csv, report_csv(result));

  const auto& s = result.reports.front().sizes;
  std::cerr << "split days " << s.train_days << "/" << s.val_days << "/" << s.test_days << ", images "
            << s.train_images << "/" << s.val_images << "/" << s.test_images << "\n";
  for (const auto& r : result.reports) {
    char line[160];
    std::snprintf(line, sizeof line, "%-26s precision %.4f  recall %.4f  F1 %.4f\n", r.name.c_str(),
                  r.precision(), r.recall(), r.f1());
    std::cerr << line;
  }
  std::cout << report;
  return 0;
}

struct SelectArgs {
  std::string corpus, model, user, day, embeddings, pool_out;
  std::int64_t spacing = 0;
  std::size_t max = 0;
};

int cmd_select(const SelectArgs& a) {
  if (a.spacing < 0) throw UsageError("--spacing must be >= 0");
  const Corpus corpus = Corpus::load(a.corpus);
  const TrainedModel model = load_model(a.model);
  const auto stream = corpus.photostream(a.user, std::string_view(a.day));
  if (stream.empty()) throw ValidationError("no images for user '" + a.user + "' on day '" + a.day + "'");
  std::optional<EmbeddingTable> table;
  if (uses_embeddings(model.variant)) {
    table = embeddings_for(a.embeddings, a.corpus);
    if (!table) throw ValidationError("model variant needs embeddings; pass --embeddings");
  }
  ImagePool pool;
  pool.user_id = a.user;
  pool.day_id = a.day;
  pool.images = select_rich(stream, model, table ? &*table : nullptr, a.spacing, a.max);
  const fs::path pool_path = a.pool_out.empty() ? fs::path("pool-" + a.user + "-" + a.day + ".json") : fs::path(a.pool_out);
  save_pool(pool, pool_path);
  for (const auto& s : pool.images) std::cout << s.image_id << ' ' << text::format_double(s.score) << '\n';
  std::cerr << pool.images.size() << " of " << stream.size() << " images selected; pool written to "
            << pool_path.string() << "\n";
  return 0;
}

struct SynthArgs {
  std::string out;
  SyntheticSpec spec;
  std::size_t rich_per_day = 0;
  bool has_rich_per_day = false;
};

int cmd_synth(SynthArgs a) {
  if (a.has_rich_per_day) a.spec.rich_per_day = a.rich_per_day;
  try {
    a.spec.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const SyntheticSummary s = make_synthetic(a.spec, a.out);
  std::cerr << "wrote " << s.images << " images over " << s.days << " days to " << a.out << " ("
            << s.labeled_rich << " labeled rich, " << s.images - s.labeled_rich << " nonrich, " << s.flipped
            << " flipped)\n";
  nlohmann::json out{{"images", s.images},
                     {"days", s.days},
                     {"rich", s.labeled_rich},
                     {"nonrich", s.images - s.labeled_rich},
                     {"planted_rich", s.planted_rich},
                     {"flipped", s.flipped}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct FeaturesArgs {
  std::string corpus, variant = "baseline", embeddings, out;
};

int cmd_features(const FeaturesArgs& a) {
  const auto variant = parse_variant(a.variant);
  if (!variant || *variant == Variant::w2v_pca || *variant == Variant::svm) {
    throw UsageError("--variant must be baseline or w2v");
  }
  if (*variant == Variant::w2v && a.embeddings.empty()) throw UsageError("variant w2v requires --embeddings");
  const Corpus corpus = Corpus::load(a.corpus);
  std::optional<EmbeddingTable> table;
  if (!a.embeddings.empty()) table = load_embeddings(a.embeddings);
  const VariantFeaturizer featurizer(*variant, PyramidConfig::standard(), table ? &*table : nullptr);
  std::vector<std::string> ids;
  Matrix rows;
  for (const auto& rec : corpus.images()) {
    ids.push_back(rec.image_id);
    rows.append_row(featurizer.extract(rec, load_pixels(rec)).values);
  }
  std::ofstream file(a.out, std::ios::binary);
  if (!file) throw IoError("cannot write " + a.out);
  write_feature_csv(file, ids, rows);
  std::cerr << "wrote " << ids.size() << " rows of " << featurizer.length() << " features (" << featurizer.layout_id()
            << ")\n";
  return 0;
}

int cmd_serve(const std::string& config_path) {
  service::ServiceConfig config;
  if (!config_path.empty()) config = service::ServiceConfig::load(config_path);
  config.apply_env();
  return service::run_server(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rich-image selection pipeline and Position Recall game service"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Fit one variant on the train split and write a model file");
  train_cmd->add_option("--corpus", train.corpus, "Corpus directory")->required();
  train_cmd->add_option("--variant", train.variant, "baseline, w2v, w2v-pca or svm")->required();
  train_cmd->add_option("--out", train.out, "Model file to write")->required();
  train_cmd->add_option("--embeddings", train.embeddings, "Word embeddings file (w2v variants)");
  train_cmd->add_option("--seed", train.seed, "Split and forest seed")->capture_default_str();
  train_cmd->add_option("--trees", train.trees, "Forest size")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--pca-components", train.pca, "PCA output dimension (w2v-pca)")->capture_default_str();
  train_cmd->add_option("--threads", train.threads, "Training threads, 0 = all cores")->capture_default_str();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Run the four-configuration ablation and write a report");
  eval_cmd->add_option("--corpus", eval.corpus, "Corpus directory")->required();
  eval_cmd->add_option("--embeddings", eval.embeddings, "Word embeddings file")->required();
  eval_cmd->add_option("--report", eval.report, "JSON report to write")->required();
  eval_cmd->add_option("--csv", eval.csv, "Optional CSV summary to write");
  eval_cmd->add_option("--seed", eval.seed, "Split and forest seed")->capture_default_str();
  eval_cmd->add_option("--trees", eval.trees, "Forest size")->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--pca-components", eval.pca, "PCA output dimension")->capture_default_str();
  eval_cmd->add_option("--threads", eval.threads, "Training threads, 0 = all cores")->capture_default_str();

  SelectArgs sel;
  auto* select_cmd = app.add_subcommand("select", "Pick rich images from one day of a user's photostream");
  select_cmd->add_option("--corpus", sel.corpus, "Corpus directory")->required();
  select_cmd->add_option("--model", sel.model, "Model file")->required();
  select_cmd->add_option("--user", sel.user, "User id")->required();
  select_cmd->add_option("--day", sel.day, "Day (YYYY-MM-DD)")->required();
  select_cmd->add_option("--spacing", sel.spacing, "Minimum seconds between selected images")->capture_default_str();
  select_cmd->add_option("--max", sel.max, "Maximum images to keep, 0 = no cap")->capture_default_str();
  select_cmd->add_option("--embeddings", sel.embeddings, "Embeddings file (defaults to the corpus copy)");
  select_cmd->add_option("--pool-out", sel.pool_out, "Pool file to write (default pool-<user>-<day>.json)");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
  synth_cmd->add_option("--days", synth.spec.n_days, "Number of days")->required();
  synth_cmd->add_option("--images-per-day", synth.spec.images_per_day, "Images per day")->required();
  synth_cmd->add_option("--noise", synth.spec.noise, "Label flip probability in [0, 0.5)")->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--users", synth.spec.n_users, "Users sharing the days")->capture_default_str();
  synth_cmd->add_option("--rich-fraction", synth.spec.rich_fraction, "Per-image rich probability")
      ->capture_default_str();
  auto* rich_opt = synth_cmd->add_option("--rich-per-day", synth.rich_per_day, "Exact rich images per day");
  synth_cmd->add_option("--embedding-dim", synth.spec.embedding_dim, "Embedding dimension")->capture_default_str();
  synth_cmd->add_option("--width", synth.spec.width, "Image width in pixels")->capture_default_str();
  synth_cmd->add_option("--height", synth.spec.height, "Image height in pixels")->capture_default_str();
  synth_cmd->add_option("--start-date", synth.spec.start_date, "First day (YYYY-MM-DD)")->capture_default_str();

  FeaturesArgs feats;
  auto* features_cmd = app.add_subcommand("features", "Export the feature matrix of a corpus as CSV");
  features_cmd->add_option("--corpus", feats.corpus, "Corpus directory")->required();
  features_cmd->add_option("--variant", feats.variant, "baseline or w2v")->capture_default_str();
  features_cmd->add_option("--embeddings", feats.embeddings, "Word embeddings file (w2v)");
  features_cmd->add_option("--out", feats.out, "CSV file to write")->required();

  std::string config_path;
  auto* serve_cmd = app.add_subcommand("serve", "Run the game HTTP service");
  serve_cmd->add_option("--config", config_path, "INI configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*eval_cmd) return cmd_eval(eval);
    if (*select_cmd) return cmd_select(sel);
    if (*synth_cmd) {
      synth.has_rich_per_day = rich_opt->count() > 0;
      return cmd_synth(synth);
    }
    if (*features_cmd) return cmd_features(feats);
    if (*serve_cmd) return cmd_serve(config_path);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
