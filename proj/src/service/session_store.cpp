#include <algorithm>
#include <cstdio>
#include <random>
#include <unistd.h>

#include "recallkit/log.hpp"
#include "recallkit/service.hpp"
#include "recallkit/text.hpp"

namespace recallkit::service {

namespace fs = std::filesystem;

nlohmann::json ApiError::body() const {
  nlohmann::json j = extra_;
  j["code"] = code_;
  j["message"] = what();
  return j;
}

ApiError to_api_error(const game::GameError& error, const game::GameSession* session) {
  using game::ErrorCode;
  int status = 409;
  switch (error.code()) {
    case ErrorCode::invalid_level:
    case ErrorCode::invalid_position: status = 400; break;
    case ErrorCode::pool_too_small: status = 422; break;
    case ErrorCode::out_of_order:
    case ErrorCode::double_submit:
    case ErrorCode::session_completed:
    case ErrorCode::latency_not_applicable: status = 409; break;
  }
  nlohmann::json extra = nlohmann::json::object();
  if (error.code() == ErrorCode::session_completed && session) extra["final_score"] = session->score();
  return ApiError(status, std::string(game::to_string(error.code())), error.what(), std::move(extra));
}

SessionStore::SessionStore(fs::path data_dir, game::Clock clock)
    : dir_(std::move(data_dir) / "sessions"), clock_(std::move(clock)) {
  fs::create_directories(dir_);
}

std::size_t SessionStore::restore() {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::unique_lock lock(mutex_);
  std::size_t restored = 0;
  for (const auto& file : files) {
    const std::string content = text::read_file(file);
    std::vector<game::Event> events;
    std::size_t good_bytes = 0;
    std::size_t start = 0;
    bool torn = false;
    while (start < content.size()) {
      const std::size_t nl = content.find('\n', start);
      if (nl == std::string::npos) {
        torn = true;  // killed mid-append; the reply for this event was never sent
        break;
      }
      const std::string_view line(content.data() + start, nl - start);
      if (!text::trim(line).empty()) events.push_back(game::event_from_json(nlohmann::json::parse(line)));
      start = nl + 1;
      good_bytes = start;
    }
    if (torn) {
      log::warn(file.string() + ": dropping a partially written final event");
      text::write_file_atomic(file, content.substr(0, good_bytes));
    }
    if (events.empty()) continue;
    auto entry = std::make_unique<Entry>();
    entry->session.emplace(game::GameSession::replay(events, clock_));
    entry->persisted = events.size();
    sessions_[entry->session->id()] = std::move(entry);
    ++restored;
  }
  return restored;
}

std::string SessionStore::fresh_id() {
  static thread_local std::mt19937_64 gen(std::random_device{}());
  for (;;) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
    if (!sessions_.count(buf)) return buf;
  }
}

void SessionStore::persist(const std::string& session_id, Entry& entry) {
  const auto& events = entry.session->transcript();
  if (entry.persisted == events.size()) return;
  std::string lines;
  for (std::size_t i = entry.persisted; i < events.size(); ++i) lines += game::to_json(events[i]).dump() + "\n";
  const fs::path file = dir_ / (session_id + ".jsonl");
  std::FILE* f = std::fopen(file.c_str(), "ab");
  if (!f) throw IoError("cannot open " + file.string() + " for append");
  const bool ok = std::fwrite(lines.data(), 1, lines.size(), f) == lines.size() && std::fflush(f) == 0 &&
                  ::fsync(fileno(f)) == 0;
  std::fclose(f);
  if (!ok) throw IoError("failed to persist an event to " + file.string());
  entry.persisted = events.size();
}

nlohmann::json SessionStore::create(const std::string& user_id, int level, std::vector<std::string> pool,
                                    std::uint64_t seed) {
  std::unique_lock lock(mutex_);
  const std::string id = fresh_id();
  auto entry = std::make_unique<Entry>();
  try {
    entry->session.emplace(game::GameSession::create(id, user_id, level, std::move(pool), seed, clock_));
  } catch (const game::GameError& e) {
    throw to_api_error(e);
  }
  persist(id, *entry);
  const auto& s = *entry->session;
  nlohmann::json out{{"session_id", id},
                     {"user_id", user_id},
                     {"seed", seed},
                     {"pool_size", s.pool().size()},
                     {"config", game::to_json(s.config())}};
  sessions_[id] = std::move(entry);
  return out;
}

SessionStore::Entry& SessionStore::find(const std::string& session_id) {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw ApiError(404, "session_not_found", "no session " + session_id);
  return *it->second;
}

nlohmann::json SessionStore::apply(const std::string& session_id, std::string_view op, const nlohmann::json& input) {
  Entry& entry = find(session_id);
  std::lock_guard lock(entry.mutex);
  auto& s = *entry.session;
  nlohmann::json out;
  try {
    if (op == "trial") {
      out = s.start_trial(input.value("practice", false));
    } else if (op == "latency") {
      out = s.advance_latency();
    } else if (op == "target") {
      out = s.reveal_target();
    } else if (op == "answer") {
      out = s.submit_answer(input.at("position").get<std::int64_t>());
    } else {
      throw ApiError(404, "not_found", "unknown operation");
    }
  } catch (const game::GameError& e) {
    throw to_api_error(e, &s);
  }
  persist(session_id, entry);
  return out;
}

nlohmann::json SessionStore::snapshot(const std::string& session_id) {
  Entry& entry = find(session_id);
  std::lock_guard lock(entry.mutex);
  return entry.session->snapshot();
}

std::size_t SessionStore::size() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

}  // namespace recallkit::service
