#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "recallkit/evaluation.hpp"
#include "recallkit/game.hpp"
#include "recallkit/select.hpp"
#include "recallkit/synthetic.hpp"
#include "recallkit/text.hpp"

namespace py = pybind11;
using namespace recallkit;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict confusion_dict(const Confusion& c) {
  py::dict d;
  d["tp"] = c.tp;
  d["fp"] = c.fp;
  d["tn"] = c.tn;
  d["fn"] = c.fn;
  d["precision"] = c.precision();
  d["recall"] = c.recall();
  d["f1"] = c.f1();
  return d;
}

std::optional<EmbeddingTable> maybe_embeddings(const std::optional<std::filesystem::path>& path) {
  if (!path) return std::nullopt;
  return load_embeddings(*path);
}

PipelineOptions options_for(std::uint64_t seed, std::size_t n_trees, std::size_t pca_components) {
  PipelineOptions o;
  o.seed = seed;
  o.n_trees = n_trees;
  o.pca_components = pca_components;
  return o;
}

}  // namespace

PYBIND11_MODULE(_recallkit, m) {
  m.doc() = "Rich-image detection pipeline and Position Recall game engine";

  // Handles are leaked on purpose: they must outlive module teardown.
  static py::handle base_error = py::exception<Error>(m, "RecallkitError").release();
  static py::handle data_error = py::exception<DataError>(m, "DataError", base_error).release();
  static py::handle argument_error = py::exception<ArgumentError>(m, "ArgumentError", base_error).release();
  static py::handle game_error = py::exception<game::GameError>(m, "GameError", base_error).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const game::GameError& e) {
      // args = (code, message) so callers can branch on the machine code.
      py::tuple args = py::make_tuple(std::string(game::to_string(e.code())), e.what());
      py::set_error(game_error, args);
    } catch (const DataError& e) {
      py::set_error(data_error, e.what());
    } catch (const ArgumentError& e) {
      py::set_error(argument_error, e.what());
    } catch (const Error& e) {
      py::set_error(base_error, e.what());
    }
  });

  m.def("f1", &recallkit::f1, py::arg("precision"), py::arg("recall"));
  m.def(
      "confusion",
      [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
        return confusion_dict(confusion(y_true, y_pred));
      },
      py::arg("y_true"), py::arg("y_pred"));
  m.def(
      "gini", [](const std::vector<std::size_t>& counts) { return gini(counts); }, py::arg("counts"));
  m.def(
      "cosine_similarity",
      [](const std::vector<double>& u, const std::vector<double>& v) { return cosine_similarity(u, v); },
      py::arg("u"), py::arg("v"));
  m.def(
      "assign_cell", [](double x, double y, double w, double h, int n) { return assign_cell({x, y, w, h}, n); },
      py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"), py::arg("grid_side"));
  m.def(
      "feature_length",
      [](const std::string& pyramid, std::size_t class_dim) {
        return feature_length(PyramidConfig::parse(pyramid), class_dim);
      },
      py::arg("pyramid") = "1x5,2x3,3x2", py::arg("class_dim") = 1);

  py::class_<RandomForest>(m, "RandomForest")
      .def("predict",
           [](const RandomForest& f, const std::vector<double>& x) {
             const auto p = f.predict(x);
             return py::make_tuple(p.label == Richness::rich ? 1 : 0, p.score);
           })
      .def_property_readonly("n_trees", [](const RandomForest& f) { return f.trees().size(); })
      .def_property_readonly("max_features", &RandomForest::max_features)
      .def("to_json", [](const RandomForest& f) { return to_json(f).dump(); });
  m.def(
      "fit_forest",
      [](const std::vector<std::vector<double>>& x, const std::vector<int>& y, std::size_t n_trees,
         std::size_t max_features, std::uint64_t seed) {
        ForestParams p;
        p.n_trees = n_trees;
        p.max_features = max_features;
        p.seed = seed;
        return fit_forest(Matrix::from_rows(x), y, p);
      },
      py::arg("x"), py::arg("y"), py::arg("n_trees") = 100, py::arg("max_features") = 0, py::arg("seed") = 0);

  m.def(
      "make_synthetic",
      [](const std::filesystem::path& out, std::size_t days, std::size_t images_per_day, double noise,
         std::uint64_t seed, std::optional<std::size_t> rich_per_day, std::size_t users, std::size_t embedding_dim) {
        SyntheticSpec spec;
        spec.n_days = days;
        spec.images_per_day = images_per_day;
        spec.noise = noise;
        spec.seed = seed;
        spec.rich_per_day = rich_per_day;
        spec.n_users = users;
        spec.embedding_dim = embedding_dim;
        const auto s = make_synthetic(spec, out);
        py::dict d;
        d["images"] = s.images;
        d["days"] = s.days;
        d["planted_rich"] = s.planted_rich;
        d["labeled_rich"] = s.labeled_rich;
        d["flipped"] = s.flipped;
        return d;
      },
      py::arg("out_dir"), py::arg("days") = 15, py::arg("images_per_day") = 100, py::arg("noise") = 0.0,
      py::arg("seed") = 0, py::arg("rich_per_day") = py::none(), py::arg("users") = 1,
      py::arg("embedding_dim") = 300);

  py::class_<Corpus>(m, "Corpus")
      .def_static("load", &Corpus::load, py::arg("directory"))
      .def("__len__", &Corpus::size)
      .def("users", &Corpus::users)
      .def("image_ids",
           [](const Corpus& c) {
             std::vector<std::string> ids;
             for (const auto& r : c.images()) ids.push_back(r.image_id);
             return ids;
           })
      .def(
          "day_split",
          [](const Corpus& c, std::uint64_t seed) {
            const auto s = day_split(c.images(), {}, seed);
            auto days = [](const std::set<DayKey>& set) {
              std::vector<std::pair<std::string, std::string>> out;
              for (const auto& d : set) out.emplace_back(d.user_id, d.day_id);
              return out;
            };
            py::dict d;
            d["train"] = days(s.train_days);
            d["val"] = days(s.val_days);
            d["test"] = days(s.test_days);
            return d;
          },
          py::arg("seed") = 0)
      .def(
          "baseline_features",
          [](const Corpus& c, const std::string& image_id) {
            const ImageRecord* rec = c.find(image_id);
            if (!rec) throw ValidationError("unknown image " + image_id);
            return extract_baseline(*rec, load_pixels(*rec), PyramidConfig::standard()).values;
          },
          py::arg("image_id"));

  m.def(
      "train",
      [](const Corpus& corpus, const std::string& variant_name, std::uint64_t seed,
         std::optional<std::filesystem::path> embeddings, std::size_t n_trees, std::size_t pca_components) {
        const auto variant = parse_variant(variant_name);
        if (!variant) throw ArgumentError("unknown variant " + variant_name);
        const auto table = maybe_embeddings(embeddings);
        const auto r = train_variant(corpus, table ? &*table : nullptr, *variant,
                                     options_for(seed, n_trees, pca_components));
        py::dict d;
        d["model"] = serialize_model(r.fit.model);
        d["validation"] = confusion_dict(r.validation);
        d["train_days"] = r.split.train_days.size();
        d["val_days"] = r.split.val_days.size();
        d["test_days"] = r.split.test_days.size();
        return d;
      },
      py::arg("corpus"), py::arg("variant") = "baseline", py::arg("seed") = 0, py::arg("embeddings") = py::none(),
      py::arg("n_trees") = 100, py::arg("pca_components") = 30);

  m.def(
      "run_matrix",
      [](const Corpus& corpus, const std::filesystem::path& embeddings, std::uint64_t seed, std::size_t n_trees,
         std::size_t pca_components) {
        const auto table = load_embeddings(embeddings);
        return serialize_report(run_matrix(corpus, &table, options_for(seed, n_trees, pca_components)));
      },
      py::arg("corpus"), py::arg("embeddings"), py::arg("seed") = 0, py::arg("n_trees") = 100,
      py::arg("pca_components") = 30);

  m.def(
      "select_rich",
      [](const Corpus& corpus, const std::filesystem::path& model_path, const std::string& user,
         std::optional<std::string> day, std::int64_t spacing, std::size_t max_images,
         std::optional<std::filesystem::path> embeddings) {
        const auto model = load_model(model_path);
        const auto table = maybe_embeddings(embeddings);
        const auto stream = day ? corpus.photostream(user, std::string_view(*day)) : corpus.photostream(user);
        std::vector<std::pair<std::string, double>> out;
        for (const auto& s : select_rich(stream, model, table ? &*table : nullptr, spacing, max_images)) {
          out.emplace_back(s.image_id, s.score);
        }
        return out;
      },
      py::arg("corpus"), py::arg("model_path"), py::arg("user"), py::arg("day") = py::none(),
      py::arg("min_spacing_seconds") = 0, py::arg("max_images") = 0, py::arg("embeddings") = py::none());

  py::class_<game::GameSession>(m, "GameSession")
      .def_static(
          "create",
          [](const std::string& session_id, const std::string& user_id, int level, std::vector<std::string> pool,
             std::uint64_t seed) {
            // A fixed clock keeps Python-side transcripts reproducible.
            return game::GameSession::create(session_id, user_id, level, std::move(pool), seed,
                                             [] { return std::int64_t{0}; });
          },
          py::arg("session_id"), py::arg("user_id"), py::arg("level"), py::arg("pool"), py::arg("seed") = 0)
      .def("start_trial", [](game::GameSession& s, bool practice) { return to_py(s.start_trial(practice)); },
           py::arg("practice") = false)
      .def("advance_latency", [](game::GameSession& s) { return to_py(s.advance_latency()); })
      .def("reveal_target", [](game::GameSession& s) { return to_py(s.reveal_target()); })
      .def("submit_answer", [](game::GameSession& s, std::int64_t pos) { return to_py(s.submit_answer(pos)); },
           py::arg("position"))
      .def("snapshot", [](const game::GameSession& s) { return to_py(s.snapshot()); })
      .def("transcript",
           [](const game::GameSession& s) {
             auto arr = nlohmann::json::array();
             for (const auto& e : s.transcript()) arr.push_back(game::to_json(e));
             return to_py(arr);
           })
      .def_property_readonly("score", &game::GameSession::score)
      .def_property_readonly("state", [](const game::GameSession& s) { return std::string(game::to_string(s.state())); });
}
