#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "json.hpp"
#include "recallkit/corpus.hpp"
#include "recallkit/game.hpp"
#include "recallkit/select.hpp"

namespace recallkit::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  std::optional<std::filesystem::path> corpus_dir;
  std::optional<std::filesystem::path> model_path;
  std::optional<std::filesystem::path> embeddings_path;

  /// INI file with [server] host, port and [data] data_dir, corpus_dir, model_path,
  /// embeddings_path. Relative paths resolve against the file's directory.
  static ServiceConfig load(const std::filesystem::path& file);

  /// RECALLKIT_HOST, RECALLKIT_PORT, RECALLKIT_DATA_DIR, RECALLKIT_CORPUS_DIR,
  /// RECALLKIT_MODEL_PATH and RECALLKIT_EMBEDDINGS override file values.
  void apply_env();
};

/// HTTP status plus machine code; the body is {code, message, ...extra}.
class ApiError : public Error {
 public:
  ApiError(int status, std::string code, const std::string& message,
           nlohmann::json extra = nlohmann::json::object())
      : Error(message), status_(status), code_(std::move(code)), extra_(std::move(extra)) {}

  int status() const { return status_; }
  const std::string& code() const { return code_; }
  nlohmann::json body() const;

 private:
  int status_;
  std::string code_;
  nlohmann::json extra_;
};

ApiError to_api_error(const game::GameError& error, const game::GameSession* session = nullptr);

/// Sessions kept in memory and mirrored to <data_dir>/sessions/<id>.jsonl, one event per line.
/// Every accepted operation is appended and flushed before its reply leaves the store.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path data_dir, game::Clock clock = game::system_clock());

  /// Replays every persisted transcript. A torn final line is dropped with a warning.
  /// Returns the number of sessions restored.
  std::size_t restore();

  nlohmann::json create(const std::string& user_id, int level, std::vector<std::string> pool,
                        std::uint64_t seed);

  /// Runs one engine operation under the session's lock and persists its event.
  /// Throws ApiError (404) for unknown sessions; engine failures surface as ApiError too.
  nlohmann::json apply(const std::string& session_id, std::string_view op, const nlohmann::json& input);

  nlohmann::json snapshot(const std::string& session_id);
  std::size_t size() const;

 private:
  struct Entry {
    std::mutex mutex;
    std::optional<game::GameSession> session;
    std::size_t persisted = 0;
  };

  Entry& find(const std::string& session_id);
  void persist(const std::string& session_id, Entry& entry);
  std::string fresh_id();

  std::filesystem::path dir_;
  game::Clock clock_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
};

struct Reply {
  int status = 200;
  nlohmann::json body;
  std::string bytes;          // set instead of body for binary replies
  std::string content_type = "application/json";
};

/// Transport-independent request handlers.
class Api {
 public:
  /// Loads the configured corpus (if any) and restores persisted sessions.
  /// Throws DataError if a configured corpus cannot be read.
  explicit Api(ServiceConfig config, game::Clock clock = game::system_clock());

  Reply create_session(const std::string& body);
  Reply session_op(const std::string& session_id, std::string_view op, const std::string& body);
  Reply get_session(const std::string& session_id);
  Reply build_pool(const std::string& user_id, const std::string& body);
  Reply get_image(const std::string& image_id, const std::string& user_token);

  const ServiceConfig& config() const { return config_; }
  std::size_t restored_sessions() const { return restored_; }

 private:
  std::optional<ImagePool> find_pool(const std::string& user_id);
  const EmbeddingTable* embeddings();

  ServiceConfig config_;
  std::optional<Corpus> corpus_;
  SessionStore store_;
  std::size_t restored_ = 0;

  std::mutex pools_mutex_;
  std::map<std::string, ImagePool> pools_;
  std::mutex embeddings_mutex_;
  std::optional<EmbeddingTable> embeddings_;
};

/// Serves the API until SIGINT/SIGTERM. Returns 0 on clean shutdown, 3 if the port is taken.
int run_server(const ServiceConfig& config);

}  // namespace recallkit::service
