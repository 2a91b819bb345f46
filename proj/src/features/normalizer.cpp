#include <algorithm>

#include "recallkit/error.hpp"
#include "recallkit/features.hpp"

namespace recallkit {

Normalizer::Normalizer(std::string layout_id, std::vector<double> mins, std::vector<double> maxs)
    : layout_id_(std::move(layout_id)), mins_(std::move(mins)), maxs_(std::move(maxs)) {
  if (mins_.size() != maxs_.size()) throw ArgumentError("Normalizer: min/max length mismatch");
  for (std::size_t i = 0; i < mins_.size(); ++i) {
    if (mins_[i] > maxs_[i]) throw ArgumentError("Normalizer: min > max in dimension " + std::to_string(i));
  }
}

Normalizer Normalizer::fit(std::span<const FeatureVector> train) {
  if (train.empty()) throw ArgumentError("Normalizer::fit: no training vectors");
  const auto& first = train.front();
  std::vector<double> mins = first.values;
  std::vector<double> maxs = first.values;
  for (const auto& v : train) {
    if (v.layout_id != first.layout_id || v.values.size() != mins.size()) {
      throw ArgumentError("Normalizer::fit: mixed layouts '" + first.layout_id + "' and '" +
                          v.layout_id + "'");
    }
    for (std::size_t i = 0; i < mins.size(); ++i) {
      mins[i] = std::min(mins[i], v.values[i]);
      maxs[i] = std::max(maxs[i], v.values[i]);
    }
  }
  return {first.layout_id, std::move(mins), std::move(maxs)};
}

Normalizer Normalizer::fit(const Matrix& train, std::string layout_id) {
  if (train.empty()) throw ArgumentError("Normalizer::fit: no training vectors");
  std::vector<double> mins(train.row(0).begin(), train.row(0).end());
  std::vector<double> maxs = mins;
  for (std::size_t r = 1; r < train.rows(); ++r) {
    const auto row = train.row(r);
    for (std::size_t i = 0; i < mins.size(); ++i) {
      mins[i] = std::min(mins[i], row[i]);
      maxs[i] = std::max(maxs[i], row[i]);
    }
  }
  return {std::move(layout_id), std::move(mins), std::move(maxs)};
}

void Normalizer::apply_in_place(std::span<double> values) const {
  if (values.size() != mins_.size()) {
    throw ValidationError("normalizer expects " + std::to_string(mins_.size()) +
                          " features, got " + std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double range = maxs_[i] - mins_[i];
    values[i] = range > 0.0 ? std::clamp((values[i] - mins_[i]) / range, 0.0, 1.0) : 0.0;
  }
}

void Normalizer::apply_in_place(Matrix& rows) const {
  for (std::size_t r = 0; r < rows.rows(); ++r) apply_in_place(rows.row(r));
}

FeatureVector Normalizer::apply(const FeatureVector& v) const {
  if (v.layout_id != layout_id_) {
    throw ValidationError("normalizer fitted on layout '" + layout_id_ + "' cannot scale '" +
                          v.layout_id + "'");
  }
  FeatureVector out = v;
  apply_in_place(out.values);
  return out;
}

nlohmann::json to_json(const Normalizer& n) {
  return {{"layout_id", n.layout_id()}, {"min", n.mins()}, {"max", n.maxs()}};
}

Normalizer normalizer_from_json(const nlohmann::json& j) {
  return {j.at("layout_id").get<std::string>(), j.at("min").get<std::vector<double>>(),
          j.at("max").get<std::vector<double>>()};
}

}  // namespace recallkit
