#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace recallkit {

inline constexpr int kMinClassId = 1;
inline constexpr int kMaxClassId = 9418;

enum class Richness { nonrich = 0, rich = 1 };

std::string_view to_string(Richness label);
/// Accepts exactly "rich" or "nonrich".
std::optional<Richness> parse_richness(std::string_view token);

/// Box in image-normalized coordinates: origin top-left, all values in [0,1].
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  double area() const { return w * h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Detection {
  int class_id = 0;
  std::string class_name;
  double confidence = 0.0;
  BBox bbox;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Throws ValidationError if the class id, confidence or box is out of range.
void validate(const Detection& detection);

struct ImageRecord {
  std::string image_id;
  std::string user_id;
  std::string day_id;  // YYYY-MM-DD, UTC
  std::int64_t timestamp = 0;
  std::filesystem::path pixel_source;
  std::vector<Detection> detections;
  std::optional<Richness> label;
};

using DetectionMap = std::map<std::string, std::vector<Detection>>;

/// Reads the JSON-lines detections file. Blank lines are skipped.
DetectionMap load_detections(const std::filesystem::path& path);
void save_detections(const DetectionMap& detections, const std::filesystem::path& path);

/// One row of labels.csv. `label` is empty when the row's label column is blank.
struct LabelRow {
  std::string image_id;
  std::string user_id;
  std::string day_id;
  std::int64_t timestamp = 0;
  std::string path;
  std::optional<Richness> label;
};

inline constexpr std::string_view kLabelsHeader = "image_id,user_id,day_id,timestamp,path,label";

std::vector<LabelRow> load_label_rows(const std::filesystem::path& path);
void save_label_rows(const std::vector<LabelRow>& rows, const std::filesystem::path& path);

/// image_id -> label for every labeled row.
std::map<std::string, Richness> load_labels(const std::filesystem::path& path);

/// Fixed on-disk corpus layout.
struct CorpusLayout {
  static constexpr std::string_view labels = "labels.csv";
  static constexpr std::string_view detections = "detections.jsonl";
  static constexpr std::string_view images = "images";
  static constexpr std::string_view embeddings = "embeddings.txt";
};

/// Immutable set of image records, ordered by (user_id, timestamp, image_id).
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<ImageRecord> images);

  /// Reads labels.csv and detections.jsonl from `dir`; relative image paths resolve against `dir`.
  static Corpus load(const std::filesystem::path& dir);

  const std::vector<ImageRecord>& images() const { return images_; }
  std::size_t size() const { return images_.size(); }
  bool empty() const { return images_.empty(); }

  const ImageRecord* find(std::string_view image_id) const;

  /// Time-ordered images of one user, optionally restricted to a single day.
  std::vector<const ImageRecord*> photostream(std::string_view user_id,
                                              std::optional<std::string_view> day_id = {}) const;

  std::set<std::string> users() const;

 private:
  std::vector<ImageRecord> images_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Word embeddings

class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension = 0) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }

  /// Stores under the lowercased word. Returns false if the word replaced an earlier entry.
  bool insert(std::string_view word, std::vector<double> vector);

  /// Exact lookup of a lowercased single word.
  const std::vector<double>* find(std::string_view word) const;

  /// Embedding of a class name: the whole name if present, otherwise the mean of the
  /// in-vocabulary tokens (split on space, '_' and '-'), otherwise the zero vector.
  std::vector<double> embed(std::string_view name) const;
  bool covers(std::string_view name) const;

  const std::unordered_map<std::string, std::vector<double>>& entries() const { return entries_; }

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

/// Text format: header "<count> <dimension>", then "<word> v1 ... vdim" per line.
/// Duplicate words keep the last vector and emit a warning.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Day-disjoint splits

struct DayKey {
  std::string user_id;
  std::string day_id;

  friend auto operator<=>(const DayKey&, const DayKey&) = default;
};

enum class Split { train, val, test };

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct SplitAssignment {
  std::set<DayKey> train_days;
  std::set<DayKey> val_days;
  std::set<DayKey> test_days;
  std::uint64_t seed = 0;

  std::optional<Split> split_of(const ImageRecord& record) const;

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

/// Shuffles the distinct (user, day) pairs with `seed` and cuts them into three groups.
/// Validation and test get round(ratio * days) each (at least one); train takes the rest.
SplitAssignment day_split(const std::vector<ImageRecord>& images, SplitRatios ratios,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Pixels

/// Interleaved RGB, row-major, channel values in [0,1].
struct PixelBuffer {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  float at(int row, int col, int channel) const {
    return data[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
  float& at(int row, int col, int channel) {
    return data[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }

  static PixelBuffer filled(int height, int width, float r, float g, float b);
};

/// Decodes PNG or JPEG. Throws IoError naming the image id on failure.
PixelBuffer load_pixels(const ImageRecord& record);
PixelBuffer decode_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG; used by the synthetic generator and tests.
void write_png(const PixelBuffer& pixels, const std::filesystem::path& path);

}  // namespace recallkit
