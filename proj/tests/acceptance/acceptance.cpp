// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fails.
// Runtime budgets are part of each criterion.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "oracles/cart_oracle.hpp"
#include "recallkit/evaluation.hpp"
#include "recallkit/features.hpp"
#include "recallkit/game.hpp"
#include "recallkit/metrics.hpp"
#include "recallkit/random.hpp"
#include "recallkit/text.hpp"
#include "recallkit/tree.hpp"
#include "support/game_driver.hpp"
#include "support/test_support.hpp"

using namespace recallkit;
using testsupport::quote;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

const std::string kCli = RECALLKIT_CLI_PATH;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Collects failed checks so a criterion reports every problem, not just the first.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_.empty()) return {true, summary};
    std::string d = summary;
    for (const auto& f : failures_) d += "; FAILED: " + f;
    return {false, d};
  }

 private:
  std::vector<std::string> failures_;
};

testsupport::CommandResult cli(const std::string& args) {
  return testsupport::run_command(quote(kCli) + " " + args + " 2>/dev/null");
}

// ---------------------------------------------------------------------------

Outcome metric_formulas() {
  Checks c;
  const double a = f1(0.79, 0.79);
  c.expect(a == 0.79, "f1(0.79, 0.79) = " + text::format_double(a));
  const double b = f1(0.5, 1.0);
  c.expect(std::abs(b - 0.66667) <= 1e-5, "f1(0.5, 1) = " + text::format_double(b));
  Rng rng(20240101);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.index(200);
    std::vector<int> t(n), p(n);
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t k = 0; k < n; ++k) {
      t[k] = int(rng.index(2));
      p[k] = int(rng.index(2));
      (t[k] ? (p[k] ? tp : fn) : (p[k] ? fp : tn))++;
    }
    const auto m = confusion(t, p);
    const bool ok = m.tp == tp && m.fp == fp && m.tn == tn && m.fn == fn && m.total() == n &&
                    m.precision() >= 0 && m.precision() <= 1 && m.recall() >= 0 && m.recall() <= 1;
    bad += !ok;
  }
  c.expect(bad == 0, std::to_string(bad) + " of 1000 label vectors mis-partitioned");
  return c.outcome("f1(0.79,0.79)=" + text::format_double(a) + " f1(0.5,1)=" + text::format_double(b) +
                   ", 1000 random label vectors partition");
}

// ---------------------------------------------------------------------------

std::size_t layout_formula(const PyramidConfig& cfg, std::size_t class_dim) {
  std::size_t n = 0;
  for (const auto& l : cfg.levels) n += std::size_t(l.grid_side * l.grid_side) * (3 + std::size_t(l.max_objects) * (class_dim + 2));
  return n;
}

Outcome feature_layout() {
  Checks c;
  const auto cfg = PyramidConfig::standard();
  const auto pixels = PixelBuffer::filled(12, 12, 0.3f, 0.5f, 0.7f);

  EmbeddingTable table(300);
  Rng erng(5);
  const std::vector<std::string> names{"person", "cat", "dog", "car", "tree", "bride", "bench"};
  for (const auto& w : names) {
    std::vector<double> v(300);
    for (auto& x : v) x = erng.normal();
    table.insert(w, v);
  }
  const EmbeddingFeaturizer emb(table);

  ImageRecord empty;
  empty.image_id = "empty";
  const auto base0 = extract_baseline(empty, pixels, cfg).values;
  const auto emb0 = emb.extract(empty, pixels, cfg).values;
  c.expect(base0.size() == 147 && layout_formula(cfg, 1) == 147, "baseline length " + std::to_string(base0.size()));
  c.expect(emb0.size() == 10612 && layout_formula(cfg, 300) == 10612, "embedding length " + std::to_string(emb0.size()));

  Rng rng(77);
  std::size_t perm_fail = 0, slot_fail = 0, len_fail = 0;
  for (int trial = 0; trial < 500; ++trial) {
    ImageRecord rec;
    rec.image_id = "r";
    const std::size_t n = rng.index(14);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = rng.uniform(0.02, 0.6), h = rng.uniform(0.02, 0.6);
      const std::size_t k = rng.index(names.size());
      rec.detections.push_back(testsupport::detection(int(k) + 1, names[k], 0.05 * double(1 + rng.index(19)),
                                                      rng.uniform(0, 1 - w), rng.uniform(0, 1 - h), w, h));
    }
    ImageRecord shuffled = rec;
    rng.shuffle(shuffled.detections);
    const auto a = extract_baseline(rec, pixels, cfg).values;
    const auto b = extract_baseline(shuffled, pixels, cfg).values;
    const auto ea = emb.extract(rec, pixels, cfg).values;
    const auto eb = emb.extract(shuffled, pixels, cfg).values;
    perm_fail += (a != b) || (ea != eb);
    len_fail += a.size() != 147 || ea.size() != 10612;

    // Zero-slot property: each cell has exactly min(count, m) nonzero slots, filled first.
    std::size_t off = 0;
    for (const auto& lv : cfg.levels) {
      for (int cell = 0; cell < lv.grid_side * lv.grid_side; ++cell) {
        const std::size_t count = std::size_t(a[off]);
        const std::size_t filled = std::min<std::size_t>(count, std::size_t(lv.max_objects));
        for (int s = 0; s < lv.max_objects; ++s) {
          const double* slot = &a[off + 3 + 3 * std::size_t(s)];
          const bool zero = slot[0] == 0 && slot[1] == 0 && slot[2] == 0;
          if (zero != (std::size_t(s) >= filled)) ++slot_fail;
          if (s > 0 && !zero && slot[2] > slot[-1]) ++slot_fail;
        }
        off += 3 + 3 * std::size_t(lv.max_objects);
      }
    }
  }
  c.expect(perm_fail == 0, std::to_string(perm_fail) + " permutation mismatches");
  c.expect(slot_fail == 0, std::to_string(slot_fail) + " slot violations");
  c.expect(len_fail == 0, std::to_string(len_fail) + " length mismatches");
  return c.outcome("lengths 147 / 10612; 500 random detection sets permutation-invariant with zero-padded slots");
}

// ---------------------------------------------------------------------------

Outcome tree_oracle() {
  // 16 sample types: a corner of {0,1}^3 with a label. Every multiset of 1..8 samples.
  std::vector<std::vector<double>> corners;
  for (int k = 0; k < 8; ++k) corners.push_back({double(k & 1), double((k >> 1) & 1), double((k >> 2) & 1)});
  std::size_t datasets = 0, mismatches = 0;
  std::vector<int> types;
  std::function<void(int)> rec = [&](int min_type) {
    if (!types.empty()) {
      std::vector<std::vector<double>> rows;
      std::vector<int> y;
      for (int t : types) {
        rows.push_back(corners[std::size_t(t >> 1)]);
        y.push_back(t & 1);
      }
      const auto tree = fit_tree(Matrix::from_rows(rows), y, 0, datasets);
      std::vector<std::size_t> idx(rows.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      const auto ref = oracle::build_cart(rows, y, idx);
      for (const auto& r : rows)
        if (tree.predict(r) != oracle::cart_predict(*ref, r)) {
          ++mismatches;
          break;
        }
      ++datasets;
    }
    if (types.size() == 8) return;
    for (int t = min_type; t < 16; ++t) {
      types.push_back(t);
      rec(t);
      types.pop_back();
    }
  };
  rec(0);
  Checks c;
  c.expect(datasets == 735470, "enumerated " + std::to_string(datasets) + " datasets, expected 735470");
  c.expect(mismatches == 0, std::to_string(mismatches) + " datasets disagree with the oracle");
  return c.outcome(std::to_string(datasets) + " datasets (all multisets of <= 8 labeled binary 3-feature samples) match");
}

// ---------------------------------------------------------------------------

struct Workspace {
  TempDir dir{"recallkit-accept"};
  fs::path clean = dir / "clean";
  fs::path noisy = dir / "noisy";
  fs::path clean_report = dir / "clean.json";
  fs::path noisy_report = dir / "noisy.json";
};

Outcome synthetic_end_to_end(Workspace& w) {
  Checks c;
  const std::string synth = "synth --days 15 --images-per-day 100 --seed 7 --noise ";
  c.expect(cli(synth + "0 --out " + quote(w.clean)).exit_code == 0, "synth noise 0");
  c.expect(cli(synth + "0 --out " + quote(w.dir / "clean2")).exit_code == 0, "synth noise 0 rerun");
  c.expect(testsupport::hash_tree(w.clean) == testsupport::hash_tree(w.dir / "clean2"), "synth reruns differ");

  auto eval = [&](const fs::path& corpus, const fs::path& report) {
    return cli("eval --corpus " + quote(corpus) + " --embeddings " + quote(corpus / "embeddings.txt") + " --report " +
               quote(report));
  };
  c.expect(eval(w.clean, w.clean_report).exit_code == 0, "eval noise 0");
  c.expect(eval(w.clean, w.dir / "clean_again.json").exit_code == 0, "eval rerun");
  const std::string r1 = testsupport::read_text(w.clean_report);
  c.expect(!r1.empty() && r1 == testsupport::read_text(w.dir / "clean_again.json"), "reports not byte-identical");

  std::string split = "?", f1_clean = "?", f1_noisy = "?";
  try {
    const auto rep = nlohmann::json::parse(r1);
    const auto& s = rep.at("configs").at(0).at("split_sizes");
    split = std::to_string(s.at("train_days").get<int>()) + "/" + std::to_string(s.at("val_days").get<int>()) + "/" +
            std::to_string(s.at("test_days").get<int>());
    c.expect(split == "9/3/3", "day split " + split);
    const double f = rep.at("configs").at(0).at("f1");
    f1_clean = text::format_double(f);
    c.expect(f == 1.0, "config (1) F1 " + f1_clean);
  } catch (const std::exception& e) {
    c.expect(false, std::string("clean report: ") + e.what());
  }

  c.expect(cli(synth + "0.1 --out " + quote(w.noisy)).exit_code == 0, "synth noise 0.1");
  c.expect(eval(w.noisy, w.noisy_report).exit_code == 0, "eval noise 0.1");
  try {
    const auto rep = nlohmann::json::parse(testsupport::read_text(w.noisy_report));
    const double f = rep.at("configs").at(0).at("f1");
    f1_noisy = text::format_double(f);
    c.expect(f >= 0.85, "noisy config (1) F1 " + f1_noisy);
  } catch (const std::exception& e) {
    c.expect(false, std::string("noisy report: ") + e.what());
  }
  return c.outcome("split " + split + ", F1 " + f1_clean + " (noise 0), " + f1_noisy +
                   " (noise 0.1), reruns byte-identical");
}

// ---------------------------------------------------------------------------

std::set<DayKey> days_from(const nlohmann::json& list) {
  std::set<DayKey> out;
  for (const auto& d : list) out.insert({d.at(0).get<std::string>(), d.at(1).get<std::string>()});
  return out;
}

Outcome ablation_matrix(const Workspace& w) {
  Checks c;
  std::size_t cells_checked = 0;
  for (const auto* path : {&w.clean_report, &w.noisy_report}) {
    const auto rep = nlohmann::json::parse(testsupport::read_text(*path));
    const auto& configs = rep.at("configs");
    c.expect(configs.size() == 4, "expected 4 configs");
    const std::vector<std::string> ids{"rfc", "rfc_w2v", "rfc_w2v_pca", "svm"};
    for (std::size_t i = 0; i < configs.size() && i < 4; ++i) {
      c.expect(configs[i].at("config") == ids[i], "config " + std::to_string(i) + " id");
      for (const char* k : {"precision", "recall", "f1"}) {
        const double v = configs[i].at(k);
        c.expect(v >= 0 && v <= 1, std::string(k) + " outside [0,1]");
      }
    }

    // Rebuild the train/validation rows from the report's own split and refit every cell.
    const Corpus corpus = Corpus::load(path == &w.clean_report ? w.clean : w.noisy);
    SplitAssignment split;
    split.train_days = days_from(rep.at("split").at("train"));
    split.val_days = days_from(rep.at("split").at("val"));
    split.test_days = days_from(rep.at("split").at("test"));
    const VariantFeaturizer feat(Variant::baseline, PyramidConfig::standard(), nullptr);
    auto sets = build_feature_sets(corpus, split, {&feat}).front();
    const auto norm = Normalizer::fit(sets.train.x, feat.layout_id());
    norm.apply_in_place(sets.train.x);
    norm.apply_in_place(sets.val.x);

    const auto& svm = configs.at(3);
    const auto& grid = svm.at("grid");
    c.expect(grid.size() == default_c_grid().size() * default_gamma_grid().size(), "grid is not complete");
    std::set<std::pair<double, double>> pairs;
    double best = -1, best_c = 0, best_g = 0;
    for (const auto& cell : grid) {
      const double C = cell.at("C"), g = cell.at("gamma");
      pairs.insert({C, g});
      std::optional<double> f;
      try {
        const auto m = fit_svm(sets.train.x, sets.train.y, C, g);
        std::vector<int> pred;
        for (std::size_t r = 0; r < sets.val.x.rows(); ++r) pred.push_back(m.predict(sets.val.x.row(r)) == Richness::rich);
        f = confusion(sets.val.y, pred).f1();
      } catch (const Error&) {
      }
      const bool reported = !cell.at("val_f1").is_null();
      c.expect(reported == f.has_value(), "cell failure status differs");
      if (f && reported) c.expect(std::abs(*f - cell.at("val_f1").get<double>()) < 1e-12, "cell F1 differs");
      if (f && *f > best) {
        best = *f;
        best_c = C;
        best_g = g;
      }
      ++cells_checked;
    }
    c.expect(pairs.size() == grid.size(), "grid cells are not distinct");
    const auto& hp = svm.at("hyperparameters");
    c.expect(hp.at("C") == best_c && hp.at("gamma") == best_g,
             "chosen (C, gamma) does not maximize validation F1 (best " + text::format_double(best_c) + ", " +
                 text::format_double(best_g) + ")");
  }
  return c.outcome("4 configs with precision/recall/F1; " + std::to_string(cells_checked) +
                   " grid cells recomputed, chosen pair maximizes validation F1");
}

// ---------------------------------------------------------------------------

Outcome fig4_proportion(const Workspace& w) {
  Checks c;
  const fs::path model = w.dir / "fig4-model.json", stream = w.dir / "fig4-stream";
  c.expect(cli("train --corpus " + quote(w.clean) + " --variant baseline --out " + quote(model)).exit_code == 0,
           "train on the noise-free corpus");
  c.expect(cli("synth --days 1 --images-per-day 972 --rich-per-day 221 --seed 99 --out " + quote(stream)).exit_code == 0,
           "synth planted stream");
  const auto r = cli("select --corpus " + quote(stream) + " --model " + quote(model) +
                     " --user u1 --day 2017-03-06 --spacing 0 --pool-out " + quote(w.dir / "fig4-pool.json"));
  c.expect(r.exit_code == 0, "select exit " + std::to_string(r.exit_code));
  const auto lines = std::count(r.out.begin(), r.out.end(), '\n');
  c.expect(lines == 221, std::to_string(lines) + " selected");
  return c.outcome(std::to_string(lines) + " of 972 selected (221 planted)");
}

// ---------------------------------------------------------------------------

Outcome game_determinism() {
  Checks c;
  game::Clock clock = [] { return std::int64_t{0}; };
  auto pool = testsupport::numbered_pool(40);

  std::size_t sessions = 0;
  for (int level = 1; level <= 3; ++level) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng r1(seed * 31 + 1), r2(seed * 31 + 1);
      auto a = game::GameSession::create("s", "u", level, pool, seed, clock);
      auto b = game::GameSession::create("s", "u", level, pool, seed, clock);
      testsupport::play_full(a, r1);
      testsupport::play_full(b, r2);
      bool same = a.transcript().size() == b.transcript().size();
      for (std::size_t i = 0; same && i < a.transcript().size(); ++i)
        same = game::to_json(a.transcript()[i]) == game::to_json(b.transcript()[i]);
      c.expect(same, "transcripts differ at level " + std::to_string(level));
      c.expect(game::GameSession::replay(a.transcript(), clock).snapshot() == a.snapshot(), "replay differs");
      ++sessions;
    }
    for (std::size_t k = 0; k <= 10; ++k) {
      auto s = game::GameSession::create("s", "u", level, pool, k, clock);
      testsupport::play_scored(s, [&](std::size_t t) { return t < k; });
      c.expect(s.state() == game::SessionState::completed && s.score() == int(100 * k),
               "score " + std::to_string(s.score()) + " for " + std::to_string(k) + " correct");
      c.expect(s.score() <= 1000, "score above 1000");
    }
  }

  // 10,000 random operations across the three levels; rejections must not change anything.
  Rng rng(4242);
  std::size_t rejected = 0, mutated = 0, ops = 0;
  std::optional<game::GameSession> s;
  for (; ops < 10000; ++ops) {
    if (!s || (s->state() == game::SessionState::completed && rng.bernoulli(0.1)))
      s = game::GameSession::create("s", "u", int(1 + rng.index(3)), pool, rng.next(), clock);
    const auto before = s->snapshot();
    const std::size_t events = s->transcript().size();
    try {
      switch (rng.index(5)) {
        case 0: s->start_trial(false); break;
        case 1: s->start_trial(true); break;
        case 2: s->advance_latency(); break;
        case 3: s->reveal_target(); break;
        default: s->submit_answer(std::int64_t(rng.index(11)) - 1); break;
      }
    } catch (const game::GameError&) {
      ++rejected;
      if (s->snapshot() != before || s->transcript().size() != events) ++mutated;
    }
    if (s->score() != 100 * int(s->correct_count()) || s->correct_count() > s->scored_completed()) ++mutated;
  }
  c.expect(mutated == 0, std::to_string(mutated) + " rejected operations changed state");
  c.expect(rejected > 1000, "too few rejections to be meaningful");
  return c.outcome(std::to_string(sessions) + " replayed sessions identical, scores 100k for k=0..10 at each level, " +
                   std::to_string(rejected) + " of " + std::to_string(ops) + " random ops rejected without mutation");
}

// ---------------------------------------------------------------------------

struct Driver {
  httplib::Client http;
  explicit Driver(int port) : http("127.0.0.1", port) { http.set_read_timeout(10, 0); }

  nlohmann::json post(const std::string& path, const nlohmann::json& body, int expect = 200) {
    auto r = http.Post(path, body.dump(), "application/json");
    if (!r) throw std::runtime_error("no response from " + path);
    if (r->status != expect) throw std::runtime_error(path + " returned " + std::to_string(r->status) + ": " + r->body);
    return nlohmann::json::parse(r->body);
  }
  nlohmann::json get(const std::string& path) {
    auto r = http.Get(path);
    if (!r) throw std::runtime_error("no response from " + path);
    return nlohmann::json::parse(r->body);
  }
};

fs::path write_config(const fs::path& dir, const fs::path& data, const fs::path& corpus, const fs::path& model) {
  const fs::path ini = dir / (data.filename().string() + ".ini");
  testsupport::write_text(ini, "[server]\nhost = 127.0.0.1\nport = 0\n[data]\ndata_dir = " + data.string() +
                                   "\ncorpus_dir = " + corpus.string() + "\nmodel_path = " + model.string() + "\n");
  return ini;
}

Outcome crash_restart(const Workspace& w) {
  Checks c;
  const fs::path model = w.dir / "fig4-model.json";
  const fs::path corpus = w.clean;

  // The prefix of operations both runs perform before the crash point.
  auto prefix = [](Driver& d) {
    d.post("/api/users/u1/pool", nlohmann::json::object());
    const std::string sid = d.post("/api/sessions", {{"user_id", "u1"}, {"level", 3}, {"seed", 12345}}, 201).at("session_id");
    const std::string base = "/api/sessions/" + sid;
    d.post(base + "/trial", {{"practice", true}});
    d.post(base + "/latency", nlohmann::json::object());
    d.post(base + "/target", nlohmann::json::object());
    d.post(base + "/answer", {{"position", 4}});
    for (int t = 0; t < 3; ++t) {
      d.post(base + "/trial", nlohmann::json::object());
      d.post(base + "/latency", nlohmann::json::object());
      d.post(base + "/target", nlohmann::json::object());
      d.post(base + "/answer", {{"position", t}});
    }
    d.post(base + "/trial", nlohmann::json::object());
    d.post(base + "/latency", nlohmann::json::object());
    return base;
  };
  // The requests compared after the crash point.
  auto suffix = [](Driver& d, const std::string& base) {
    nlohmann::json out = nlohmann::json::array();
    out.push_back(d.post(base + "/target", nlohmann::json::object()));
    out.push_back(d.post(base + "/answer", {{"position", 2}}));
    out.push_back(d.post(base + "/trial", nlohmann::json::object()));
    auto snap = d.get(base);
    snap.erase("session_id");
    out.push_back(snap);
    return out;
  };

  nlohmann::json control, restarted;
  std::size_t restored = 0;
  try {
    {
      const fs::path ini = write_config(w.dir.path(), w.dir / "control-data", corpus, model);
      testsupport::ChildProcess server({kCli, "serve", "--config", ini.string()}, w.dir / "control.log");
      const int port = server.wait_for_port();
      if (port < 0) throw std::runtime_error("control server did not start");
      Driver d(port);
      control = suffix(d, prefix(d));
    }
    const fs::path ini = write_config(w.dir.path(), w.dir / "crash-data", corpus, model);
    std::string base;
    {
      testsupport::ChildProcess server({kCli, "serve", "--config", ini.string()}, w.dir / "crash1.log");
      const int port = server.wait_for_port();
      if (port < 0) throw std::runtime_error("server did not start");
      Driver d(port);
      base = prefix(d);
      c.expect(server.kill(SIGKILL) == -SIGKILL, "server was not killed");
    }
    testsupport::ChildProcess server({kCli, "serve", "--config", ini.string()}, w.dir / "crash2.log");
    const int port = server.wait_for_port();
    if (port < 0) throw std::runtime_error("restarted server did not start");
    const std::string log = testsupport::read_text(w.dir / "crash2.log");
    restored = log.find("(1 sessions restored)") != std::string::npos ? 1 : 0;
    Driver d(port);
    restarted = suffix(d, base);
    server.kill(SIGTERM);
  } catch (const std::exception& e) {
    c.expect(false, e.what());
  }
  c.expect(restored == 1, "restart did not report the restored session");
  c.expect(!control.is_null() && control == restarted, "post-restart payloads differ from the control run");
  return c.outcome("SIGKILL mid-trial, restart restored " + std::to_string(restored) +
                   " session; next 3 requests and the snapshot match the uninterrupted run");
}

// ---------------------------------------------------------------------------

struct Criterion {
  const char* id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  Workspace w;
  const std::vector<Criterion> criteria{
      {"AC1", "metric formulas", 1, metric_formulas},
      {"AC2", "feature layout", 10, feature_layout},
      {"AC3", "tree oracle equivalence", 120, tree_oracle},
      {"AC4", "synthetic end-to-end", 300, [&] { return synthetic_end_to_end(w); }},
      {"AC5", "ablation matrix shape", 600, [&] { return ablation_matrix(w); }},
      {"AC6", "photostream proportion 221/972", 60, [&] { return fig4_proportion(w); }},
      {"AC7", "game determinism and scoring", 30, game_determinism},
      {"AC8", "service crash-restart", 60, [&] { return crash_restart(w); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + text::format_double(c.budget_s) + " s budget";
    }
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs/%gs", secs, c.budget_s);
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << " " << c.title << " [" << timing << "]: " << o.detail
              << std::endl;
    failed += !o.pass;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - std::size_t(failed) << "/" << criteria.size()
            << std::endl;
  return failed ? 1 : 0;
}
