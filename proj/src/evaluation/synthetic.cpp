#include "recallkit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "recallkit/corpus.hpp"
#include "recallkit/error.hpp"
#include "recallkit/random.hpp"
#include "recallkit/text.hpp"

namespace recallkit {

namespace {

struct VocabEntry {
  int class_id;
  const char* name;
};

constexpr VocabEntry kVocabulary[] = {
    {1, "person"},        {37, "worker"},        {52, "workman"},     {88, "employee"},
    {104, "consumer"},    {131, "groom"},        {157, "bride"},      {212, "cup"},
    {260, "laptop"},      {318, "chair"},        {377, "table"},      {415, "book"},
    {480, "car"},         {533, "tree"},         {597, "dog"},        {640, "cat"},
    {702, "bottle"},      {761, "screen"},       {815, "keyboard"},   {874, "phone"},
    {930, "window"},      {987, "door"},         {1043, "plate"},     {1109, "bicycle"},
    {1166, "bus"},        {1220, "traffic light"}, {1284, "street sign"}, {1341, "television"},
    {1407, "sofa"},       {1460, "lamp"},        {1525, "clock"},     {1583, "bag"},
    {1649, "shoe"},       {1702, "glass"},       {1768, "fork"},      {1821, "knife"},
    {1889, "spoon"},      {1943, "bowl"},        {2011, "pizza"},     {2076, "sandwich"},
    {2130, "apple"},      {2197, "banana"},      {2254, "flower"},    {2318, "plant"},
    {2377, "painting"},   {2441, "mirror"},      {2509, "shelf"},     {2566, "desk"},
    {2634, "computer_mouse"}, {2697, "umbrella"}, {2760, "bench"},    {2823, "building"},
};

constexpr double kRound = 1e4;
double round4(double v) { return std::round(v * kRound) / kRound; }

constexpr std::int64_t kDayStartSeconds = 8 * 3600;
constexpr std::int64_t kCaptureInterval = 30;

void paint_rich(PixelBuffer& px, Rng& rng) {
  const float base[3] = {float(rng.uniform(0.4, 0.9)), float(rng.uniform(0.4, 0.9)), float(rng.uniform(0.4, 0.9))};
  for (int r = 0; r < px.height; ++r) {
    for (int c = 0; c < px.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) px.at(r, c, ch) = base[ch];
    }
  }
  const std::size_t rects = 4 + rng.index(5);
  for (std::size_t k = 0; k < rects; ++k) {
    const int w = 1 + int(rng.index(std::size_t(px.width / 2)));
    const int h = 1 + int(rng.index(std::size_t(px.height / 2)));
    const int x0 = int(rng.index(std::size_t(px.width - w + 1)));
    const int y0 = int(rng.index(std::size_t(px.height - h + 1)));
    const float color[3] = {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())};
    for (int r = y0; r < y0 + h; ++r) {
      for (int c = x0; c < x0 + w; ++c) {
        for (int ch = 0; ch < 3; ++ch) px.at(r, c, ch) = color[ch];
      }
    }
  }
  // Per-pixel texture keeps every cell's colour variance well above the dark images'.
  for (float& v : px.data) v = std::clamp(v + float(rng.uniform(-0.2, 0.2)), 0.0f, 1.0f);
}

void paint_dark(PixelBuffer& px, Rng& rng) {
  const double level = rng.uniform(0.03, 0.1);
  const float base[3] = {float(level), float(level * rng.uniform(0.9, 1.1)), float(level * rng.uniform(0.9, 1.1))};
  for (int r = 0; r < px.height; ++r) {
    for (int c = 0; c < px.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        px.at(r, c, ch) = std::clamp(base[ch] + float(rng.uniform(-0.01, 0.01)), 0.0f, 1.0f);
      }
    }
  }
}

Detection random_detection(Rng& rng, double conf_lo, double conf_hi, double size_lo, double size_hi) {
  const auto& entry = kVocabulary[rng.index(std::size(kVocabulary))];
  Detection d;
  d.class_id = entry.class_id;
  d.class_name = entry.name;
  d.confidence = round4(rng.uniform(conf_lo, conf_hi));
  d.bbox.w = round4(rng.uniform(size_lo, size_hi));
  d.bbox.h = round4(rng.uniform(size_lo, size_hi));
  d.bbox.x = std::floor(rng.uniform() * (1.0 - d.bbox.w) * kRound) / kRound;
  d.bbox.y = std::floor(rng.uniform() * (1.0 - d.bbox.h) * kRound) / kRound;
  return d;
}

EmbeddingTable make_embeddings(std::size_t dim, Rng& rng) {
  std::set<std::string> words;
  for (const auto& e : kVocabulary) {
    words.insert(e.name);
    for (const auto& tok : text::split(e.name, '_')) words.insert(tok);
    for (const auto& tok : text::split(e.name, ' ')) words.insert(tok);
  }
  const std::set<std::string> person_like = {"worker", "workman", "employee", "consumer", "groom", "bride"};
  auto random_vec = [&] {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal() * 0.1;
    return v;
  };
  EmbeddingTable table(dim);
  const std::vector<double> person = random_vec();
  table.insert("person", person);
  for (const auto& w : words) {
    if (w == "person") continue;
    // Whole multi-token names stay out of the vocabulary so they embed as token means.
    if (w.find(' ') != std::string::npos) continue;
    std::vector<double> v = random_vec();
    if (person_like.count(w)) {
      for (std::size_t i = 0; i < dim; ++i) v[i] = person[i] + 0.3 * v[i];
    }
    table.insert(w, std::move(v));
  }
  return table;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_days == 0 || images_per_day == 0 || n_users == 0) {
    throw ArgumentError("days, images per day and users must be positive");
  }
  if (!(noise >= 0.0 && noise < 0.5)) throw ArgumentError("noise rate must lie in [0, 0.5)");
  if (!(rich_fraction >= 0.0 && rich_fraction <= 1.0)) throw ArgumentError("rich fraction must lie in [0, 1]");
  if (rich_per_day && *rich_per_day > images_per_day) {
    throw ArgumentError("rich images per day exceed images per day");
  }
  if (std::int64_t(images_per_day) * kCaptureInterval > 86400 - kDayStartSeconds) {
    throw ArgumentError("too many images to fit one capture day at one photo every 30 s");
  }
  if (width < 3 || height < 3) throw ArgumentError("images must be at least 3x3 pixels");
  if (embedding_dim == 0) throw ArgumentError("embedding dimension must be positive");
  text::utc_midnight(start_date);
}

SyntheticSummary make_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / CorpusLayout::images);

  SyntheticSummary summary;
  std::vector<LabelRow> rows;
  DetectionMap detections;
  const std::int64_t start = text::utc_midnight(spec.start_date);

  for (std::size_t d = 0; d < spec.n_days; ++d) {
    const std::string user = "u" + std::to_string(d % spec.n_users + 1);
    const std::int64_t midnight = start + std::int64_t(d / spec.n_users) * 86400;
    const std::string date = text::utc_date(midnight);
    Rng day_rng(derive_seed(spec.seed, d));

    std::vector<bool> rich(spec.images_per_day, false);
    if (spec.rich_per_day) {
      for (std::size_t i : day_rng.sample_without_replacement(spec.images_per_day, *spec.rich_per_day)) {
        rich[i] = true;
      }
    } else {
      for (std::size_t i = 0; i < spec.images_per_day; ++i) rich[i] = day_rng.bernoulli(spec.rich_fraction);
    }

    for (std::size_t i = 0; i < spec.images_per_day; ++i) {
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "-%04zu", i + 1);
      const std::string id = user + "-" + date + suffix;
      Rng rng(derive_seed(derive_seed(spec.seed, d), i + 1));

      PixelBuffer px = PixelBuffer::filled(spec.height, spec.width, 0.f, 0.f, 0.f);
      std::vector<Detection> dets;
      if (rich[i]) {
        paint_rich(px, rng);
        const std::size_t n = 2 + rng.index(5);
        for (std::size_t k = 0; k < n; ++k) dets.push_back(random_detection(rng, 0.6, 0.99, 0.1, 0.5));
      } else {
        paint_dark(px, rng);
        if (rng.bernoulli(0.5)) dets.push_back(random_detection(rng, 0.05, 0.35, 0.05, 0.3));
      }
      const std::string rel = std::string(CorpusLayout::images) + "/" + id + ".png";
      write_png(px, out_dir / rel);
      detections[id] = std::move(dets);

      Richness label = rich[i] ? Richness::rich : Richness::nonrich;
      if (spec.noise > 0.0 && rng.bernoulli(spec.noise)) {
        label = rich[i] ? Richness::nonrich : Richness::rich;
        ++summary.flipped;
      }
      summary.planted_rich += rich[i];
      summary.labeled_rich += label == Richness::rich;
      ++summary.images;
      rows.push_back({id, user, date, midnight + kDayStartSeconds + std::int64_t(i) * kCaptureInterval, rel, label});
    }
    ++summary.days;
  }

  save_label_rows(rows, out_dir / CorpusLayout::labels);
  save_detections(detections, out_dir / CorpusLayout::detections);
  Rng emb_rng(derive_seed(spec.seed, 0xE3BEDD1Full));
  save_embeddings(make_embeddings(spec.embedding_dim, emb_rng), out_dir / CorpusLayout::embeddings);
  return summary;
}

}  // namespace recallkit
