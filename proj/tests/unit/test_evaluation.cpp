#include <algorithm>
#include <set>

#include "doctest.h"
#include "recallkit/error.hpp"
#include "recallkit/evaluation.hpp"
#include "recallkit/random.hpp"
#include "recallkit/select.hpp"
#include "recallkit/synthetic.hpp"
#include "recallkit/text.hpp"
#include "support/test_support.hpp"

using namespace recallkit;
using testsupport::TempDir;

namespace {

PipelineOptions fast_options(std::uint64_t seed = 3) {
  PipelineOptions o;
  o.seed = seed;
  o.n_trees = 15;
  o.threads = 1;
  o.pca_components = 8;
  o.c_grid = {1.0, 10.0};
  o.gamma_grid = {0.01, 0.1};
  return o;
}

// A small noise-free corpus shared by the pipeline tests.
struct SmallCorpus {
  TempDir dir{"recallkit-eval"};
  Corpus corpus;
  EmbeddingTable embeddings;

  SmallCorpus() {
    SyntheticSpec spec;
    spec.n_days = 5;
    spec.images_per_day = 24;
    spec.seed = 11;
    spec.embedding_dim = 20;
    make_synthetic(spec, dir.path());
    corpus = Corpus::load(dir.path());
    embeddings = load_embeddings(dir / "embeddings.txt");
  }
};

SmallCorpus& small_corpus() {
  static SmallCorpus c;
  return c;
}

Candidate cand(std::string id, std::int64_t t, bool rich, double score) {
  return {std::move(id), t, {rich ? Richness::rich : Richness::nonrich, score}};
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("f1 examples") {
    CHECK(f1(0.79, 0.79) == doctest::Approx(0.79).epsilon(1e-15));
    CHECK(f1(1, 1) == 1.0);
    CHECK(f1(0.5, 1) == doctest::Approx(0.66667).epsilon(1e-5));
    CHECK(f1(0, 0) == 0.0);
  }

  TEST_CASE("confusion examples") {
    const std::vector<int> a{1, 1, 0};
    CHECK(confusion(a, a) == Confusion{2, 0, 1, 0});
    const std::vector<int> t2{1, 0}, p2{0, 1};
    const auto c2 = confusion(t2, p2);
    CHECK(c2 == Confusion{0, 1, 0, 1});
    CHECK(c2.precision() == 0.0);
    CHECK(c2.recall() == 0.0);
    const std::vector<int> t3{1, 1, 0, 0}, p3{1, 0, 1, 0};
    CHECK(confusion(t3, p3).precision() == 0.5);
    CHECK(confusion(t3, p3).recall() == 0.5);
    const std::vector<int> shorter{1};
    CHECK_THROWS_AS(confusion(t3, shorter), ArgumentError);
    const std::vector<int> bad{2, 0, 0, 0};
    CHECK_THROWS_AS(confusion(bad, p3), ArgumentError);
  }

  TEST_CASE("weighted scores") {
    const auto w = weighted_scores(Confusion{2, 1, 3, 0});
    CHECK(w.precision == doctest::Approx(16.0 / 18.0));
    CHECK(w.recall == doctest::Approx((2.0 * 1.0 + 4.0 * 0.75) / 6.0));
  }

  TEST_CASE("confusion partitions random label vectors") {
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
      const std::size_t n = 1 + rng.index(50);
      std::vector<int> t(n), p(n);
      for (std::size_t k = 0; k < n; ++k) {
        t[k] = int(rng.index(2));
        p[k] = int(rng.index(2));
      }
      const auto c = confusion(t, p);
      CHECK(c.total() == n);
      for (double m : {c.precision(), c.recall(), c.f1()}) CHECK((m >= 0.0 && m <= 1.0));
    }
  }

  TEST_CASE("select_rich examples") {
    std::vector<Candidate> none{cand("a", 0, false, 0.1), cand("b", 10, false, 0.2)};
    CHECK(select_rich(none, 0, 0).empty());

    std::vector<Candidate> close{cand("a", 0, true, 0.7), cand("b", 10, true, 0.9)};
    const auto kept = select_rich(close, 300, 0);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].image_id == "b");

    CHECK(select_rich(std::vector<Candidate>{}, 0, 0).empty());
    std::vector<Candidate> unsorted{cand("a", 10, true, 1), cand("b", 0, true, 1)};
    CHECK_THROWS_AS(select_rich(unsorted, 0, 0), ArgumentError);
    CHECK_THROWS_AS(select_rich(close, -1, 0), ArgumentError);
  }

  TEST_CASE("select_rich: subset, time-ordered, spaced, capped") {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<Candidate> cs;
      std::int64_t t = 0;
      for (std::size_t i = 0, n = rng.index(40); i < n; ++i) {
        t += std::int64_t(rng.index(60));
        cs.push_back(cand("i" + std::to_string(i), t, rng.bernoulli(0.6), double(rng.index(5)) / 4.0));
      }
      const std::int64_t spacing = std::int64_t(rng.index(120));
      const std::size_t cap = rng.index(6);
      const auto out = select_rich(cs, spacing, cap);
      if (cap) CHECK(out.size() <= cap);
      std::set<std::string> ids;
      for (const auto& c : cs)
        if (c.prediction.label == Richness::rich) ids.insert(c.image_id);
      for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(ids.count(out[i].image_id) == 1);
        if (i) {
          CHECK(out[i].timestamp >= out[i - 1].timestamp);
          CHECK(out[i].timestamp - out[i - 1].timestamp >= spacing);
        }
      }
    }
  }

  TEST_CASE("pool json round trip") {
    ImagePool pool{"u1", std::string("2017-03-06"), {{"a", 10, 0.75}, {"b", 20, 1.0}}};
    TempDir dir;
    save_pool(pool, dir / "pool.json");
    const auto back = load_pool(dir / "pool.json");
    CHECK(back.user_id == "u1");
    CHECK(back.day_id == pool.day_id);
    CHECK(back.images == pool.images);
    CHECK(back.ids() == std::vector<std::string>{"a", "b"});
  }

  TEST_CASE("synthetic spec validation and determinism") {
    SyntheticSpec bad;
    bad.noise = 0.6;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    SyntheticSpec spec;
    spec.n_days = 3;
    spec.images_per_day = 10;
    spec.embedding_dim = 8;
    spec.seed = 4;
    TempDir a, b;
    const auto sa = make_synthetic(spec, a.path());
    make_synthetic(spec, b.path());
    CHECK(sa.images == 30);
    CHECK(sa.days == 3);
    CHECK(testsupport::hash_tree(a.path()) == testsupport::hash_tree(b.path()));

    spec.rich_per_day = 4;
    TempDir c;
    CHECK(make_synthetic(spec, c.path()).planted_rich == 12);
  }

  TEST_CASE("synthetic noise flips labels") {
    SyntheticSpec spec;
    spec.n_days = 3;
    spec.images_per_day = 100;
    spec.embedding_dim = 4;
    spec.noise = 0.2;
    TempDir dir;
    const auto s = make_synthetic(spec, dir.path());
    CHECK(s.flipped > 20);
    CHECK(s.flipped < 100);
  }

  TEST_CASE("train_variant on a separable corpus") {
    auto& c = small_corpus();
    const auto r = train_variant(c.corpus, nullptr, Variant::baseline, fast_options());
    CHECK(r.validation.f1() == 1.0);
    CHECK(r.fit.model.forest.has_value());
    CHECK(r.split.train_days.size() == 3);
    CHECK_THROWS_AS(train_variant(c.corpus, nullptr, Variant::w2v, fast_options()), ValidationError);
  }

  TEST_CASE("model files round-trip and reject other versions") {
    auto& c = small_corpus();
    const auto r = train_variant(c.corpus, &c.embeddings, Variant::w2v_pca, fast_options());
    const std::string text = serialize_model(r.fit.model);
    CHECK(serialize_model(model_from_json(nlohmann::json::parse(text))) == text);
    auto j = nlohmann::json::parse(text);
    j["format_version"] = kModelFormatVersion + 1;
    CHECK_THROWS_AS(model_from_json(j), ModelFormatError);
    j = nlohmann::json::parse(text);
    j.erase("pca");
    CHECK_THROWS_AS(model_from_json(j), ModelFormatError);
  }

  TEST_CASE("run_matrix: four configs, perfect scores, no test leakage, byte-stable") {
    auto& c = small_corpus();
    const auto m = run_matrix(c.corpus, &c.embeddings, fast_options());
    REQUIRE(m.reports.size() == 4);
    const std::vector<std::string> ids{"rfc", "rfc_w2v", "rfc_w2v_pca", "svm"};
    std::set<std::string> test(m.test_ids.begin(), m.test_ids.end());
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& rep = m.reports[i];
      CHECK(rep.config_id == ids[i]);
      CHECK(rep.f1() == 1.0);
      CHECK(rep.confusion.total() == m.test_ids.size());
      const auto& a = m.audits[i];
      for (const auto* list : {&a.normalizer_ids, &a.classifier_ids, &a.pca_ids, &a.tuning_ids})
        for (const auto& id : *list) CHECK(test.count(id) == 0);
    }
    CHECK_FALSE(m.audits[2].pca_ids.empty());
    CHECK(m.reports[3].grid.size() == 4);
    CHECK(serialize_report(m) == serialize_report(run_matrix(c.corpus, &c.embeddings, fast_options())));
    const std::string csv = report_csv(m);
    CHECK(csv.rfind("config,precision,recall,f1,weighted_f1,tp,fp,tn,fn\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK_THROWS_AS(run_matrix(c.corpus, nullptr, fast_options()), ValidationError);
  }

  TEST_CASE("run_matrix rejects an unlabeled corpus") {
    std::vector<ImageRecord> images;
    for (int d = 0; d < 3; ++d) {
      ImageRecord r;
      r.image_id = "i" + std::to_string(d);
      r.user_id = "u";
      r.timestamp = 86400 * d;
      r.day_id = text::utc_date(r.timestamp);
      images.push_back(r);
    }
    EmbeddingTable t(2);
    t.insert("person", {1, 0});
    CHECK_THROWS_AS(run_matrix(Corpus(images), &t, fast_options()), ValidationError);
  }
}
