#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace recallkit {

/// Parameters of the planted-richness corpus generator.
struct SyntheticSpec {
  std::size_t n_days = 15;
  std::size_t images_per_day = 100;
  std::size_t n_users = 1;
  double rich_fraction = 0.58;              // per-image probability when rich_per_day is unset
  std::optional<std::size_t> rich_per_day;  // exact planted count per day
  double noise = 0.0;                       // label flip probability, in [0, 0.5)
  std::uint64_t seed = 0;
  int width = 64;
  int height = 48;
  std::size_t embedding_dim = 300;
  std::string start_date = "2017-03-06";

  /// Throws ArgumentError on out-of-range values.
  void validate() const;
};

struct SyntheticSummary {
  std::size_t images = 0;
  std::size_t days = 0;
  std::size_t planted_rich = 0;
  std::size_t labeled_rich = 0;  // after noise
  std::size_t flipped = 0;
};

/// Writes labels.csv, detections.jsonl, images/*.png and embeddings.txt under `out_dir`.
/// Rich images get 2-6 confident objects over busy, bright pixels; non-rich images get
/// dark near-uniform pixels and at most one weak detection. Fully determined by `spec`.
SyntheticSummary make_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace recallkit
