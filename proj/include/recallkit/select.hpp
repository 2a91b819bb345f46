#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "recallkit/corpus.hpp"
#include "recallkit/forest.hpp"
#include "recallkit/model.hpp"

namespace recallkit {

struct Candidate {
  std::string image_id;
  std::int64_t timestamp = 0;
  Prediction prediction;
};

struct Selected {
  std::string image_id;
  std::int64_t timestamp = 0;
  double score = 0.0;

  friend bool operator==(const Selected&, const Selected&) = default;
};

/// Keeps rich predictions, then walks them by descending score (ties: earlier, then smaller id)
/// and drops any image closer than `min_spacing_seconds` to one already kept. At most
/// `max_images` survive (0 means no cap). Output is time-ordered.
/// Throws ArgumentError if `candidates` is not time-sorted or the spacing is negative.
std::vector<Selected> select_rich(std::span<const Candidate> candidates, std::int64_t min_spacing_seconds,
                                  std::size_t max_images);

/// Scores a photostream with `model` and applies select_rich.
std::vector<Selected> select_rich(const std::vector<const ImageRecord*>& photostream, const TrainedModel& model,
                                  const EmbeddingTable* embeddings, std::int64_t min_spacing_seconds,
                                  std::size_t max_images);

/// A user's ordered rich-image pool, as consumed by the game service.
struct ImagePool {
  std::string user_id;
  std::optional<std::string> day_id;
  std::vector<Selected> images;

  std::vector<std::string> ids() const;
};

nlohmann::json to_json(const ImagePool& pool);
ImagePool pool_from_json(const nlohmann::json& j);
void save_pool(const ImagePool& pool, const std::filesystem::path& path);
ImagePool load_pool(const std::filesystem::path& path);

}  // namespace recallkit
