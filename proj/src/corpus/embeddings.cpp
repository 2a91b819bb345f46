#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "recallkit/corpus.hpp"
#include "recallkit/error.hpp"
#include "recallkit/log.hpp"
#include "recallkit/text.hpp"

namespace recallkit {

bool EmbeddingTable::insert(std::string_view word, std::vector<double> vector) {
  if (vector.size() != dimension_) {
    throw ValidationError("embedding for '" + std::string(word) + "' has " +
                          std::to_string(vector.size()) + " values, expected " +
                          std::to_string(dimension_));
  }
  auto [it, inserted] = entries_.insert_or_assign(text::to_lower(word), std::move(vector));
  return inserted;
}

const std::vector<double>* EmbeddingTable::find(std::string_view word) const {
  auto it = entries_.find(text::to_lower(word));
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {
std::vector<std::string> name_tokens(std::string_view name) {
  std::string spaced = text::to_lower(name);
  for (auto& c : spaced) {
    if (c == '_' || c == '-') c = ' ';
  }
  return text::split_ws(spaced);
}
}  // namespace

std::vector<double> EmbeddingTable::embed(std::string_view name) const {
  if (const auto* whole = find(name)) return *whole;
  std::vector<double> sum(dimension_, 0.0);
  std::size_t found = 0;
  for (const auto& token : name_tokens(name)) {
    if (const auto* v = find(token)) {
      for (std::size_t i = 0; i < dimension_; ++i) sum[i] += (*v)[i];
      ++found;
    }
  }
  if (found > 1) {
    for (auto& x : sum) x /= static_cast<double>(found);
  }
  return sum;
}

bool EmbeddingTable::covers(std::string_view name) const {
  if (find(name)) return true;
  for (const auto& token : name_tokens(name)) {
    if (find(token)) return true;
  }
  return false;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "missing '<count> <dimension>' header");
  const auto header = text::split_ws(line);
  std::int64_t declared_count = 0, dimension = 0;
  if (header.size() != 2 || !text::parse_int(header[0], declared_count) ||
      !text::parse_int(header[1], dimension) || declared_count < 0 || dimension <= 0) {
    throw ParseError(path.string(), 1, "missing '<count> <dimension>' header");
  }

  EmbeddingTable table(static_cast<std::size_t>(dimension));
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = text::split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != static_cast<std::size_t>(dimension) + 1) {
      throw ParseError(path.string(), line_no,
                       "word '" + fields[0] + "' has " + std::to_string(fields.size() - 1) +
                           " values, expected " + std::to_string(dimension));
    }
    std::vector<double> v(static_cast<std::size_t>(dimension));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!text::parse_double(fields[i + 1], v[i]) || !std::isfinite(v[i])) {
        throw ParseError(path.string(), line_no, "bad value '" + fields[i + 1] + "'");
      }
    }
    if (!table.insert(fields[0], std::move(v))) {
      log::warn(path.string() + ":" + std::to_string(line_no) + ": duplicate word '" + fields[0] +
                "', keeping the later vector");
    }
    ++rows;
  }
  if (rows != static_cast<std::size_t>(declared_count)) {
    log::warn(path.string() + ": header declares " + std::to_string(declared_count) +
              " words but " + std::to_string(rows) + " were read");
  }
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::vector<const std::pair<const std::string, std::vector<double>>*> sorted;
  for (const auto& entry : table.entries()) sorted.push_back(&entry);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->first < b->first; });
  std::ostringstream out;
  out << sorted.size() << ' ' << table.dimension() << '\n';
  char buf[32];
  for (const auto* entry : sorted) {
    out << entry->first;
    for (double x : entry->second) {
      std::snprintf(buf, sizeof(buf), " %.6f", x);
      out << buf;
    }
    out << '\n';
  }
  text::write_file_atomic(path, out.str());
}

}  // namespace recallkit
