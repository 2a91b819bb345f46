#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

#include "recallkit/corpus.hpp"
#include "recallkit/error.hpp"
#include "recallkit/log.hpp"
#include "recallkit/text.hpp"

namespace recallkit {

using nlohmann::json;

std::string_view to_string(Richness label) {
  return label == Richness::rich ? "rich" : "nonrich";
}

std::optional<Richness> parse_richness(std::string_view token) {
  if (token == "rich") return Richness::rich;
  if (token == "nonrich") return Richness::nonrich;
  return std::nullopt;
}

void validate(const Detection& d) {
  if (d.class_id < kMinClassId || d.class_id > kMaxClassId) {
    throw ValidationError("class_id " + std::to_string(d.class_id) + " outside [1, 9418]");
  }
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw ValidationError("confidence " + text::format_double(d.confidence) + " outside [0, 1]");
  }
  const BBox& b = d.bbox;
  const bool finite = std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) &&
                      std::isfinite(b.h);
  // Boxes that touch the border may overshoot 1 by rounding in the detector output.
  constexpr double slack = 1e-9;
  if (!finite || b.w <= 0.0 || b.h <= 0.0 || b.x < 0.0 || b.y < 0.0 || b.x + b.w > 1.0 + slack ||
      b.y + b.h > 1.0 + slack) {
    throw ValidationError("bbox [" + text::format_double(b.x) + "," + text::format_double(b.y) +
                          "," + text::format_double(b.w) + "," + text::format_double(b.h) +
                          "] is not a normalized box");
  }
}

// ---------------------------------------------------------------------------
// Detections file

namespace {

Detection detection_from_json(const json& j) {
  Detection d;
  d.class_id = j.at("class_id").get<int>();
  d.class_name = j.at("class_name").get<std::string>();
  d.confidence = j.at("confidence").get<double>();
  const auto& box = j.at("bbox");
  if (!box.is_array() || box.size() != 4) throw std::invalid_argument("bbox must be [x,y,w,h]");
  d.bbox = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()};
  return d;
}

json detection_to_json(const Detection& d) {
  return json{{"class_id", d.class_id},
              {"class_name", d.class_name},
              {"confidence", d.confidence},
              {"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}}};
}

}  // namespace

DetectionMap load_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open detections file " + path.string());
  DetectionMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    std::string image_id;
    std::vector<Detection> detections;
    try {
      const json j = json::parse(line);
      image_id = j.at("image_id").get<std::string>();
      for (const auto& item : j.at("detections")) detections.push_back(detection_from_json(item));
    } catch (const json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    for (const auto& d : detections) {
      try {
        validate(d);
      } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": image " +
                              image_id + ": " + e.what());
      }
    }
    if (!out.emplace(image_id, std::move(detections)).second) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": duplicate image_id " + image_id);
    }
  }
  return out;
}

void save_detections(const DetectionMap& detections, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& [image_id, list] : detections) {
    json items = json::array();
    for (const auto& d : list) items.push_back(detection_to_json(d));
    out << json{{"image_id", image_id}, {"detections", std::move(items)}}.dump() << '\n';
  }
  text::write_file_atomic(path, out.str());
}

// ---------------------------------------------------------------------------
// Labels file

std::vector<LabelRow> load_label_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || text::trim(line) != kLabelsHeader) {
    throw ParseError(path.string(), 1, "expected header '" + std::string(kLabelsHeader) + "'");
  }
  ++line_no;
  std::vector<LabelRow> rows;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = text::split(trimmed, ',');
    if (fields.size() != 6) {
      throw ParseError(path.string(), line_no,
                       "expected 6 fields, found " + std::to_string(fields.size()));
    }
    LabelRow row;
    row.image_id = std::string(text::trim(fields[0]));
    row.user_id = std::string(text::trim(fields[1]));
    row.day_id = std::string(text::trim(fields[2]));
    if (!text::parse_int(fields[3], row.timestamp)) {
      throw ParseError(path.string(), line_no, "bad timestamp '" + fields[3] + "'");
    }
    row.path = std::string(text::trim(fields[4]));
    const auto token = text::trim(fields[5]);
    if (!token.empty()) {
      row.label = parse_richness(token);
      if (!row.label) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": unknown label '" +
                              std::string(token) + "'");
      }
    }
    if (row.image_id.empty()) throw ParseError(path.string(), line_no, "empty image_id");
    if (!seen.insert(row.image_id).second) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": duplicate image_id " + row.image_id);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_label_rows(const std::vector<LabelRow>& rows, const std::filesystem::path& path) {
  std::ostringstream out;
  out << kLabelsHeader << '\n';
  for (const auto& r : rows) {
    out << r.image_id << ',' << r.user_id << ',' << r.day_id << ',' << r.timestamp << ','
        << r.path << ',' << (r.label ? to_string(*r.label) : "") << '\n';
  }
  text::write_file_atomic(path, out.str());
}

std::map<std::string, Richness> load_labels(const std::filesystem::path& path) {
  std::map<std::string, Richness> out;
  for (const auto& row : load_label_rows(path)) {
    if (row.label) out.emplace(row.image_id, *row.label);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<ImageRecord> images) : images_(std::move(images)) {
  std::stable_sort(images_.begin(), images_.end(), [](const ImageRecord& a, const ImageRecord& b) {
    return std::tie(a.user_id, a.timestamp, a.image_id) <
           std::tie(b.user_id, b.timestamp, b.image_id);
  });
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const auto& rec = images_[i];
    if (!index_.emplace(rec.image_id, i).second) {
      throw ValidationError("duplicate image_id " + rec.image_id);
    }
    if (text::utc_date(rec.timestamp) != rec.day_id) {
      throw ValidationError("image " + rec.image_id + ": timestamp " +
                            std::to_string(rec.timestamp) + " falls on " +
                            text::utc_date(rec.timestamp) + ", not day_id " + rec.day_id);
    }
    for (const auto& d : rec.detections) validate(d);
  }
}

Corpus Corpus::load(const std::filesystem::path& dir) {
  const auto rows = load_label_rows(dir / CorpusLayout::labels);
  auto detections = load_detections(dir / CorpusLayout::detections);

  std::vector<ImageRecord> images;
  images.reserve(rows.size());
  for (const auto& row : rows) {
    ImageRecord rec;
    rec.image_id = row.image_id;
    rec.user_id = row.user_id;
    rec.day_id = row.day_id;
    rec.timestamp = row.timestamp;
    std::filesystem::path p(row.path);
    rec.pixel_source = p.is_absolute() ? p : dir / p;
    rec.label = row.label;
    if (auto it = detections.find(row.image_id); it != detections.end()) {
      rec.detections = std::move(it->second);
      detections.erase(it);
    }
    images.push_back(std::move(rec));
  }
  if (!detections.empty()) {
    log::warn(std::to_string(detections.size()) +
              " detection records have no row in labels.csv and were ignored");
  }
  return Corpus(std::move(images));
}

const ImageRecord* Corpus::find(std::string_view image_id) const {
  auto it = index_.find(std::string(image_id));
  return it == index_.end() ? nullptr : &images_[it->second];
}

std::vector<const ImageRecord*> Corpus::photostream(std::string_view user_id,
                                                    std::optional<std::string_view> day_id) const {
  std::vector<const ImageRecord*> out;
  for (const auto& rec : images_) {
    if (rec.user_id != user_id) continue;
    if (day_id && rec.day_id != *day_id) continue;
    out.push_back(&rec);
  }
  return out;
}

std::set<std::string> Corpus::users() const {
  std::set<std::string> out;
  for (const auto& rec : images_) out.insert(rec.user_id);
  return out;
}

}  // namespace recallkit
