#include "doctest.h"
#include "recallkit/corpus.hpp"
#include "recallkit/error.hpp"
#include "recallkit/log.hpp"
#include "recallkit/random.hpp"
#include "recallkit/text.hpp"
#include "support/test_support.hpp"

using namespace recallkit;
using testsupport::TempDir;
using testsupport::write_text;

namespace {

std::vector<ImageRecord> days_corpus(std::size_t n_days, std::size_t n_users = 1) {
  std::vector<ImageRecord> out;
  const std::int64_t start = text::utc_midnight("2020-01-01");
  for (std::size_t d = 0; d < n_days; ++d) {
    for (std::size_t u = 0; u < n_users; ++u) {
      ImageRecord r;
      r.user_id = "u" + std::to_string(u);
      r.timestamp = start + std::int64_t(d) * 86400 + 3600;
      r.day_id = text::utc_date(r.timestamp);
      r.image_id = r.user_id + "-" + r.day_id;
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("load_detections reads one record") {
    TempDir dir;
    write_text(dir / "d.jsonl",
               R"({"image_id": "img1", "detections": [{"class_id": 7, "class_name": "cat", "confidence": 0.9, "bbox": [0.1, 0.1, 0.5, 0.5]}]})"
               "\n");
    const auto map = load_detections(dir / "d.jsonl");
    REQUIRE(map.size() == 1);
    const auto& d = map.at("img1").at(0);
    CHECK(d.class_id == 7);
    CHECK(d.class_name == "cat");
    CHECK(d.confidence == doctest::Approx(0.9));
    CHECK(d.bbox == BBox{0.1, 0.1, 0.5, 0.5});
  }

  TEST_CASE("load_detections on an empty file gives an empty map") {
    TempDir dir;
    write_text(dir / "d.jsonl", "");
    CHECK(load_detections(dir / "d.jsonl").empty());
  }

  TEST_CASE("confidence above 1 is a validation error") {
    TempDir dir;
    write_text(dir / "d.jsonl",
               R"({"image_id": "a", "detections": [{"class_id": 7, "class_name": "cat", "confidence": 1.3, "bbox": [0.1, 0.1, 0.5, 0.5]}]})"
               "\n");
    CHECK_THROWS_AS(load_detections(dir / "d.jsonl"), ValidationError);
  }

  TEST_CASE("class id outside [1, 9418] is a validation error") {
    for (int id : {0, 9419}) {
      Detection d = testsupport::detection(id, "x", 0.5, 0, 0, 0.5, 0.5);
      CHECK_THROWS_AS(validate(d), ValidationError);
    }
    CHECK_NOTHROW(validate(testsupport::detection(1, "x", 0.5, 0, 0, 0.5, 0.5)));
    CHECK_NOTHROW(validate(testsupport::detection(9418, "x", 0.5, 0, 0, 0.5, 0.5)));
  }

  TEST_CASE("boxes must stay inside the unit square with positive size") {
    CHECK_THROWS_AS(validate(testsupport::detection(1, "x", 0.5, 0.6, 0, 0.5, 0.5)), ValidationError);
    CHECK_THROWS_AS(validate(testsupport::detection(1, "x", 0.5, 0, 0, 0, 0.5)), ValidationError);
    CHECK_THROWS_AS(validate(testsupport::detection(1, "x", 0.5, -0.1, 0, 0.5, 0.5)), ValidationError);
  }

  TEST_CASE("malformed detection line names its line number") {
    TempDir dir;
    write_text(dir / "d.jsonl", "{\"image_id\": \"a\", \"detections\": []}\n\n{not json}\n");
    try {
      load_detections(dir / "d.jsonl");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("detections round-trip through save and load") {
    TempDir dir;
    DetectionMap map;
    map["a"] = {testsupport::detection(7, "cat", 0.9, 0.1, 0.2, 0.3, 0.4),
                testsupport::detection(1, "person", 0.123456789, 0, 0, 1, 1)};
    map["b"] = {};
    save_detections(map, dir / "d.jsonl");
    CHECK(load_detections(dir / "d.jsonl") == map);
  }

  TEST_CASE("load_labels") {
    TempDir dir;
    const std::string header = std::string(kLabelsHeader) + "\n";
    write_text(dir / "ok.csv", header + "a,u,2020-01-01,1577840400,a.png,rich\nb,u,2020-01-01,1577840430,b.png,nonrich\n");
    const auto labels = load_labels(dir / "ok.csv");
    CHECK(labels.size() == 2);
    CHECK(labels.at("a") == Richness::rich);
    CHECK(labels.at("b") == Richness::nonrich);

    write_text(dir / "dup.csv", header + "a,u,2020-01-01,1577840400,a.png,rich\na,u,2020-01-01,1577840400,a.png,rich\n");
    CHECK_THROWS_AS(load_labels(dir / "dup.csv"), ValidationError);

    write_text(dir / "bad.csv", header + "a,u,2020-01-01,1577840400,a.png,blurry\n");
    CHECK_THROWS_AS(load_labels(dir / "bad.csv"), ValidationError);
  }

  TEST_CASE("load_embeddings") {
    TempDir dir;
    write_text(dir / "ok.txt", "2 3\ncat 1 0 0\ndog 0 1 0\n");
    const auto table = load_embeddings(dir / "ok.txt");
    CHECK(table.dimension() == 3);
    CHECK(table.size() == 2);

    write_text(dir / "ragged.txt", "1 3\ncat 1 0\n");
    CHECK_THROWS_AS(load_embeddings(dir / "ragged.txt"), ParseError);

    write_text(dir / "noheader.txt", "cat 1 0 0\n");
    CHECK_THROWS_AS(load_embeddings(dir / "noheader.txt"), ParseError);
  }

  TEST_CASE("duplicate embedding word: last wins with a warning") {
    TempDir dir;
    write_text(dir / "dup.txt", "2 2\ncat 1 0\ncat 0 1\n");
    std::vector<std::string> warnings;
    log::ScopedSink sink([&](log::Level level, const std::string& msg) {
      if (level == log::Level::warning) warnings.push_back(msg);
    });
    const auto table = load_embeddings(dir / "dup.txt");
    REQUIRE(table.find("cat"));
    CHECK(*table.find("cat") == std::vector<double>{0, 1});
    CHECK(!warnings.empty());
  }

  TEST_CASE("multi-token names embed as the mean of known tokens") {
    EmbeddingTable t(2);
    t.insert("traffic", {1, 0});
    t.insert("light", {0, 1});
    CHECK(t.embed("traffic light") == std::vector<double>{0.5, 0.5});
    CHECK(t.embed("Traffic_unknown") == std::vector<double>{1, 0});
    CHECK(t.embed("zebra crossing") == std::vector<double>{0, 0});
    CHECK_FALSE(t.covers("zebra"));
  }

  TEST_CASE("day_split: 15 days at 0.6/0.2/0.2 gives 9/3/3") {
    const auto s = day_split(days_corpus(15), {}, 7);
    CHECK(s.train_days.size() == 9);
    CHECK(s.val_days.size() == 3);
    CHECK(s.test_days.size() == 3);
  }

  TEST_CASE("day_split: 3 days at 0.34/0.33/0.33 gives 1/1/1") {
    const auto s = day_split(days_corpus(3), {0.34, 0.33, 0.33}, 1);
    CHECK(s.train_days.size() == 1);
    CHECK(s.val_days.size() == 1);
    CHECK(s.test_days.size() == 1);
  }

  TEST_CASE("day_split rejects fewer than three days and bad ratios") {
    CHECK_THROWS_AS(day_split(days_corpus(2), {}, 0), ValidationError);
    CHECK_THROWS(day_split(days_corpus(5), {0.5, 0.5, 0.0}, 0));
    CHECK_THROWS(day_split(days_corpus(5), {0.5, 0.3, 0.3}, 0));
  }

  TEST_CASE("day_split is deterministic, disjoint and complete for many seeds") {
    const auto images = days_corpus(11, 3);
    std::set<DayKey> all;
    for (const auto& r : images) all.insert({r.user_id, r.day_id});
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto a = day_split(images, {}, seed);
      CHECK(a == day_split(images, {}, seed));
      std::set<DayKey> seen;
      std::size_t total = 0;
      for (const auto* part : {&a.train_days, &a.val_days, &a.test_days}) {
        seen.insert(part->begin(), part->end());
        total += part->size();
      }
      CHECK(total == all.size());
      CHECK(seen == all);
      // Remainder goes to train: val and test are exactly round(0.2 * 33) = 7.
      CHECK(a.val_days.size() == 7);
      CHECK(a.test_days.size() == 7);
    }
  }

  TEST_CASE("pixels: black, white and truncated files") {
    TempDir dir;
    write_png(PixelBuffer::filled(2, 2, 0, 0, 0), dir / "black.png");
    write_png(PixelBuffer::filled(1, 1, 1, 1, 1), dir / "white.png");
    const auto black = decode_image(dir / "black.png");
    CHECK(black.height == 2);
    CHECK(black.width == 2);
    for (float v : black.data) CHECK(v == 0.0f);
    const auto white = decode_image(dir / "white.png");
    CHECK(white.data == std::vector<float>{1, 1, 1});

    const std::string bytes = testsupport::read_text(dir / "black.png");
    write_text(dir / "cut.png", bytes.substr(0, bytes.size() / 2));
    ImageRecord rec;
    rec.image_id = "cut-image";
    rec.pixel_source = dir / "cut.png";
    try {
      load_pixels(rec);
      FAIL("expected an I/O error");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("cut-image") != std::string::npos);
    }
  }

  TEST_CASE("corpus load checks day ids against timestamps") {
    TempDir dir;
    const std::string header = std::string(kLabelsHeader) + "\n";
    write_png(PixelBuffer::filled(4, 4, 0, 0, 0), dir / "images/a.png");
    write_text(dir / "detections.jsonl", "");
    write_text(dir / "labels.csv", header + "a,u,2020-01-02,1577840400,images/a.png,rich\n");
    CHECK_THROWS_AS(Corpus::load(dir.path()), ValidationError);
    write_text(dir / "labels.csv", header + "a,u,2020-01-01,1577840400,images/a.png,\n");
    const Corpus c = Corpus::load(dir.path());
    REQUIRE(c.size() == 1);
    CHECK_FALSE(c.images()[0].label.has_value());
    CHECK(c.images()[0].pixel_source == dir.path() / "images/a.png");
  }

  TEST_CASE("rng draws are reproducible") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.index(17) == b.index(17));
    Rng c(5);
    const auto s = c.sample_without_replacement(10, 10);
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 10);
  }
}
