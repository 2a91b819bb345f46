#include "recallkit/select.hpp"

#include <algorithm>
#include <numeric>

#include "recallkit/error.hpp"
#include "recallkit/text.hpp"

namespace recallkit {

std::vector<Selected> select_rich(std::span<const Candidate> candidates, std::int64_t min_spacing_seconds,
                                  std::size_t max_images) {
  if (min_spacing_seconds < 0) throw ArgumentError("min_spacing_seconds must be >= 0");
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].timestamp < candidates[i - 1].timestamp) {
      throw ArgumentError("photostream is not time-sorted at " + candidates[i].image_id);
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].prediction.label == Richness::rich) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = candidates[a];
    const auto& cb = candidates[b];
    if (ca.prediction.score != cb.prediction.score) return ca.prediction.score > cb.prediction.score;
    if (ca.timestamp != cb.timestamp) return ca.timestamp < cb.timestamp;
    return ca.image_id < cb.image_id;
  });

  // Kept timestamps stay sorted so the nearest neighbours are found by binary search.
  std::vector<std::int64_t> kept_times;
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    if (max_images != 0 && kept.size() == max_images) break;
    const std::int64_t t = candidates[i].timestamp;
    auto it = std::lower_bound(kept_times.begin(), kept_times.end(), t);
    if (min_spacing_seconds > 0) {
      if (it != kept_times.end() && *it - t < min_spacing_seconds) continue;
      if (it != kept_times.begin() && t - *std::prev(it) < min_spacing_seconds) continue;
    }
    kept_times.insert(it, t);
    kept.push_back(i);
  }

  std::sort(kept.begin(), kept.end());
  std::vector<Selected> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) {
    out.push_back({candidates[i].image_id, candidates[i].timestamp, candidates[i].prediction.score});
  }
  return out;
}

std::vector<Selected> select_rich(const std::vector<const ImageRecord*>& photostream, const TrainedModel& model,
                                  const EmbeddingTable* embeddings, std::int64_t min_spacing_seconds,
                                  std::size_t max_images) {
  if (photostream.empty()) return {};
  const VariantFeaturizer featurizer = model.featurizer(embeddings);
  std::vector<Candidate> candidates;
  candidates.reserve(photostream.size());
  for (const ImageRecord* rec : photostream) {
    const auto v = featurizer.extract(*rec, load_pixels(*rec));
    candidates.push_back({rec->image_id, rec->timestamp, model.predict(v)});
  }
  return select_rich(candidates, min_spacing_seconds, max_images);
}

std::vector<std::string> ImagePool::ids() const {
  std::vector<std::string> out;
  out.reserve(images.size());
  for (const auto& s : images) out.push_back(s.image_id);
  return out;
}

nlohmann::json to_json(const ImagePool& pool) {
  auto images = nlohmann::json::array();
  for (const auto& s : pool.images) {
    images.push_back({{"image_id", s.image_id}, {"score", s.score}, {"timestamp", s.timestamp}});
  }
  nlohmann::json j{{"user_id", pool.user_id}, {"images", images}};
  if (pool.day_id) j["day_id"] = *pool.day_id;
  return j;
}

ImagePool pool_from_json(const nlohmann::json& j) {
  try {
    ImagePool pool;
    pool.user_id = j.at("user_id").get<std::string>();
    if (j.contains("day_id")) pool.day_id = j.at("day_id").get<std::string>();
    for (const auto& s : j.at("images")) {
      pool.images.push_back(
          {s.at("image_id").get<std::string>(), s.at("timestamp").get<std::int64_t>(), s.at("score").get<double>()});
    }
    return pool;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed pool: ") + e.what());
  }
}

void save_pool(const ImagePool& pool, const std::filesystem::path& path) {
  text::write_file_atomic(path, to_json(pool).dump(2) + "\n");
}

ImagePool load_pool(const std::filesystem::path& path) {
  try {
    return pool_from_json(nlohmann::json::parse(text::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": not JSON: " + e.what());
  }
}

}  // namespace recallkit
