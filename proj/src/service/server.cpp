#include <csignal>
#include <iostream>
#include <pthread.h>
#include <random>
#include <thread>

#include "httplib.h"
#include "recallkit/log.hpp"
#include "recallkit/model.hpp"
#include "recallkit/service.hpp"
#include "recallkit/text.hpp"

namespace recallkit::service {

namespace fs = std::filesystem;

namespace {

nlohmann::json parse_body(const std::string& body) {
  if (text::trim(body).empty()) return nlohmann::json::object();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw ApiError(400, "bad_request", "request body is not valid JSON");
  }
  if (!j.is_object()) throw ApiError(400, "bad_request", "request body must be a JSON object");
  return j;
}

bool valid_user_id(const std::string& user_id) {
  return !user_id.empty() && user_id.size() <= 128 &&
                  std::all_of(user_id.begin(), user_id.end(), [](unsigned char c) {
                    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
                  }) &&
                  user_id.front() != '.';
}

void check_user_id(const std::string& user_id) {
  if (!valid_user_id(user_id)) throw ApiError(400, "bad_request", "user_id must use letters, digits, '-', '_' or '.'");
}

std::int64_t nonnegative_int(const nlohmann::json& body, const char* key) {
  if (!body.contains(key)) return 0;
  const auto& v = body.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ApiError(400, "bad_request", std::string(key) + " must be a non-negative integer");
  }
  return v.get<std::int64_t>();
}

std::string content_type_for(const fs::path& path) {
  const std::string ext = text::to_lower(path.extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

Reply ok(nlohmann::json body, int status = 200) { return {status, std::move(body), {}, "application/json"}; }

}  // namespace

Api::Api(ServiceConfig config, game::Clock clock) : config_(std::move(config)), store_(config_.data_dir, clock) {
  if (config_.corpus_dir) corpus_ = Corpus::load(*config_.corpus_dir);
  fs::create_directories(config_.data_dir / "pools");
  restored_ = store_.restore();
}

std::optional<ImagePool> Api::find_pool(const std::string& user_id) {
  std::lock_guard lock(pools_mutex_);
  if (auto it = pools_.find(user_id); it != pools_.end()) return it->second;
  const fs::path file = config_.data_dir / "pools" / (user_id + ".json");
  if (!fs::exists(file)) return std::nullopt;
  ImagePool pool = load_pool(file);
  pools_[user_id] = pool;
  return pool;
}

const EmbeddingTable* Api::embeddings() {
  std::lock_guard lock(embeddings_mutex_);
  if (embeddings_) return &*embeddings_;
  std::optional<fs::path> path = config_.embeddings_path;
  if (!path && config_.corpus_dir && fs::exists(*config_.corpus_dir / CorpusLayout::embeddings)) {
    path = *config_.corpus_dir / CorpusLayout::embeddings;
  }
  if (!path) return nullptr;
  embeddings_ = load_embeddings(*path);
  return &*embeddings_;
}

Reply Api::create_session(const std::string& raw) {
  const auto body = parse_body(raw);
  if (!body.contains("user_id") || !body["user_id"].is_string()) {
    throw ApiError(400, "bad_request", "user_id is required");
  }
  const std::string user_id = body["user_id"].get<std::string>();
  check_user_id(user_id);
  if (!body.contains("level") || !body["level"].is_number_integer()) {
    throw ApiError(400, "invalid_level", "level must be 1, 2 or 3");
  }
  const std::int64_t level = body["level"].get<std::int64_t>();
  if (level < 1 || level > 3) throw ApiError(400, "invalid_level", "level must be 1, 2 or 3");
  std::uint64_t seed = 0;
  if (body.contains("seed")) {
    if (!body["seed"].is_number_unsigned()) throw ApiError(400, "bad_request", "seed must be a non-negative integer");
    seed = body["seed"].get<std::uint64_t>();
  } else {
    seed = std::random_device{}();
  }
  const auto pool = find_pool(user_id);
  if (!pool) throw ApiError(409, "pool_missing", "no image pool has been prepared for user " + user_id);
  return ok(store_.create(user_id, int(level), pool->ids(), seed), 201);
}

Reply Api::session_op(const std::string& session_id, std::string_view op, const std::string& raw) {
  const auto body = parse_body(raw);
  nlohmann::json input = nlohmann::json::object();
  if (op == "trial") {
    if (body.contains("practice") && !body["practice"].is_boolean()) {
      throw ApiError(400, "bad_request", "practice must be a boolean");
    }
    input["practice"] = body.value("practice", false);
  } else if (op == "answer") {
    if (!body.contains("position") || !body["position"].is_number_integer()) {
      // Unknown sessions still answer 404 before the body is judged.
      store_.snapshot(session_id);
      throw ApiError(400, "invalid_position", "position must be an integer grid index");
    }
    input["position"] = body["position"].get<std::int64_t>();
  }
  return ok(store_.apply(session_id, op, input));
}

Reply Api::get_session(const std::string& session_id) { return ok(store_.snapshot(session_id)); }

Reply Api::build_pool(const std::string& user_id, const std::string& raw) {
  check_user_id(user_id);
  const auto body = parse_body(raw);
  if (!corpus_) throw ApiError(404, "corpus_missing", "the service has no corpus configured");
  if (!corpus_->users().count(user_id)) throw ApiError(404, "corpus_missing", "no images for user " + user_id);

  std::optional<fs::path> model_path = config_.model_path;
  if (body.contains("model_path")) {
    if (!body["model_path"].is_string()) throw ApiError(400, "bad_request", "model_path must be a string");
    model_path = body["model_path"].get<std::string>();
  }
  if (!model_path) throw ApiError(400, "bad_request", "model_path is required (none configured)");
  const std::int64_t spacing = nonnegative_int(body, "min_spacing_seconds");
  const std::int64_t max_images = nonnegative_int(body, "max_images");
  std::optional<std::string> day_id;
  if (body.contains("day_id")) {
    if (!body["day_id"].is_string()) throw ApiError(400, "bad_request", "day_id must be a string");
    day_id = body["day_id"].get<std::string>();
  }

  std::optional<TrainedModel> model;
  const EmbeddingTable* table = nullptr;
  try {
    model = load_model(*model_path);
    if (uses_embeddings(model->variant)) {
      table = embeddings();
      if (!table) throw ValidationError("model needs word embeddings but none are configured");
    }
    model->featurizer(table);
  } catch (const DataError& e) {
    throw ApiError(422, "model_mismatch", e.what());
  }

  const auto stream = day_id ? corpus_->photostream(user_id, std::string_view(*day_id)) : corpus_->photostream(user_id);
  ImagePool pool;
  pool.user_id = user_id;
  pool.day_id = day_id;
  pool.images = select_rich(stream, *model, table, spacing, std::size_t(max_images));
  save_pool(pool, config_.data_dir / "pools" / (user_id + ".json"));
  {
    std::lock_guard lock(pools_mutex_);
    pools_[user_id] = pool;
  }
  nlohmann::json out{{"user_id", user_id}, {"pool_size", pool.images.size()}, {"image_ids", pool.ids()}};
  if (day_id) out["day_id"] = *day_id;
  return ok(std::move(out));
}

Reply Api::get_image(const std::string& image_id, const std::string& user_token) {
  const ImageRecord* rec = corpus_ ? corpus_->find(image_id) : nullptr;
  if (!rec) throw ApiError(404, "image_not_found", "no image " + image_id);
  const auto pool = valid_user_id(user_token) ? find_pool(user_token) : std::nullopt;
  const bool allowed = pool && std::any_of(pool->images.begin(), pool->images.end(),
                                           [&](const Selected& s) { return s.image_id == image_id; });
  if (!allowed) throw ApiError(403, "forbidden", "image is not in the caller's pool");
  Reply r;
  r.bytes = text::read_file(rec->pixel_source);
  r.content_type = content_type_for(rec->pixel_source);
  return r;
}

namespace {

template <typename F>
void respond(httplib::Response& res, F&& handler) {
  Reply reply;
  try {
    reply = handler();
  } catch (const ApiError& e) {
    reply = {e.status(), e.body(), {}, "application/json"};
  } catch (const DataError& e) {
    reply = {422, {{"code", "data_error"}, {"message", e.what()}}, {}, "application/json"};
  } catch (const std::exception& e) {
    reply = {500, {{"code", "internal"}, {"message", e.what()}}, {}, "application/json"};
  }
  res.status = reply.status;
  if (!reply.bytes.empty()) {
    res.set_content(reply.bytes, reply.content_type);
  } else {
    res.set_content(reply.body.dump(), "application/json");
  }
}

}  // namespace

int run_server(const ServiceConfig& config) {
  // Block the shutdown signals everywhere; one thread waits for them and stops the server.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<Api> api;
  try {
    api = std::make_unique<Api>(config);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  httplib::Server svr;
  svr.Post("/api/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] { return api->create_session(req.body); });
  });
  svr.Post(R"(/api/sessions/([^/]+)/(trial|latency|target|answer))",
           [&](const httplib::Request& req, httplib::Response& res) {
             respond(res, [&] { return api->session_op(req.matches[1], std::string(req.matches[2]), req.body); });
           });
  svr.Get(R"(/api/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] { return api->get_session(req.matches[1]); });
  });
  svr.Post(R"(/api/users/([^/]+)/pool)", [&](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] { return api->build_pool(req.matches[1], req.body); });
  });
  svr.Get(R"(/api/images/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] { return api->get_image(req.matches[1], req.get_header_value("X-User-Token")); });
  });
  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const char* code = res.status == 404 ? "not_found" : "http_error";
      res.set_content(nlohmann::json{{"code", code}, {"message", httplib::status_message(res.status)}}.dump(),
                      "application/json");
    }
  });

  // The library default enables SO_REUSEPORT, which would let a second server share a busy port.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  int port = config.port;
  if (port == 0) {
    port = svr.bind_to_any_port(config.host);
  } else if (!svr.bind_to_port(config.host, port)) {
    port = -1;
  }
  if (port < 0) {
    std::cerr << "error: cannot listen on " << config.host << ":" << config.port << "\n";
    return 3;
  }
  std::cerr << "listening on http://" << config.host << ":" << port << " (" << api->restored_sessions()
            << " sessions restored)" << std::endl;

  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    svr.stop();
  });
  const bool clean = svr.listen_after_bind();
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return clean ? 0 : 3;
}

}  // namespace recallkit::service
